from __future__ import annotations

import pytest

from gridarena.core import (
    Action,
    ActionKind,
    CombatStyle,
    Item,
    ItemKind,
    SkillSet,
    level_from_xp,
)


def test_level_curve():
    # Level n is reached at 10*n^2 cumulative xp.
    assert level_from_xp(0) == 1
    assert level_from_xp(39) == 1
    assert level_from_xp(40) == 2
    assert level_from_xp(90) == 3
    assert level_from_xp(1000) == 10
    assert level_from_xp(10**9) == 10  # clamped


def test_level_never_decreases_with_xp():
    previous = 1
    for xp in range(0, 2000, 7):
        level = level_from_xp(xp)
        assert level >= previous
        previous = level


def test_skillset_levels_and_levelup_flag():
    skills = SkillSet()
    assert skills.levels() == [1, 1, 1, 1]
    assert not skills.add_xp(0, 39)
    assert skills.add_xp(0, 1)  # crosses 40 -> level 2
    assert skills.level("melee") == 2


def test_rps_cycle_is_a_three_cycle():
    seen = set()
    style = CombatStyle.MELEE
    for _ in range(3):
        assert style.beats() != style
        assert style.beats().beats() != style  # not a 2-cycle
        seen.add(style)
        style = style.beats()
    assert style == CombatStyle.MELEE and len(seen) == 3
    for s in CombatStyle:
        assert s.beats().loses_to() == s


def test_item_invariants():
    with pytest.raises(ValueError):
        Item(uid=0, kind=ItemKind.ARMOR, tier=11)
    with pytest.raises(ValueError):
        Item(uid=0, kind=ItemKind.ARMOR, tier=1, quantity=2)
    with pytest.raises(ValueError):
        Item(uid=0, kind=ItemKind.RATION, tier=1, style=CombatStyle.MELEE)
    ammo = Item(uid=1, kind=ItemKind.AMMO, tier=2, style=CombatStyle.RANGED, quantity=5)
    same = Item(uid=2, kind=ItemKind.AMMO, tier=2, style=CombatStyle.RANGED, quantity=1)
    other = Item(uid=3, kind=ItemKind.AMMO, tier=3, style=CombatStyle.RANGED)
    assert ammo.stacks_with(same)
    assert not ammo.stacks_with(other)
    weapon = Item(uid=4, kind=ItemKind.WEAPON, tier=2, style=CombatStyle.MELEE)
    assert not weapon.stacks_with(weapon)


def test_action_codes_round_trip():
    actions = [
        Action.noop(),
        Action.move(2),
        Action.attack(CombatStyle.MAGIC, 5),
        Action.use(3),
        Action.sell(1, 9),
        Action.buy(4),
        Action.give_item(2, 1),
        Action.give_gold(7, 0),
    ]
    for action in actions:
        k, a, b = action.to_code()
        assert Action.from_code(k, a, b) == action
    with pytest.raises(ValueError):
        Action.from_code(99)
    assert Action.from_code(0).kind == ActionKind.NOOP
