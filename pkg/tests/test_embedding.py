from __future__ import annotations

import numpy as np
import pytest

from gridarena.embedding import (
    cosine,
    embed_curriculum,
    embed_task,
    overlap,
    pca_csv,
    pca_project,
    similarity_gap,
)
from gridarena.tasks import Curriculum, make_task, parse_task_file

# ------------------------------------------------------------------ embedder


def test_embedding_is_deterministic_unit_norm():
    a = embed_task("TickGE(target=1024)")
    b = embed_task("TickGE(target=1024)")
    assert np.array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) <= 1e-6
    assert a.shape == (64,)


def test_same_predicate_closer_than_different():
    same = cosine(embed_task("TickGE(target=1024)"), embed_task("TickGE(target=512)"))
    different = cosine(embed_task("TickGE(target=1024)"), embed_task("EarnGold(amount=100)"))
    assert same > different


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        embed_task("")


def test_corpus_similarity_gap():
    tasks = [
        make_task(f"t{i}", "TickGE", target=10 + i) for i in range(5)
    ] + [
        make_task(f"g{i}", "EarnGold", amount=10 + i) for i in range(5)
    ] + [
        make_task(f"k{i}", "DefeatEntity", n=1 + i) for i in range(5)
    ]
    intra, inter = similarity_gap(tasks)
    assert intra - inter >= 0.1


# ------------------------------------------------------------------- overlap


def _cur(*tasks):
    return Curriculum(list(tasks))


def test_overlap_examples():
    train = _cur(make_task("t1", "TickGE", target=512))
    eval_cur = _cur(make_task("e1", "TickGE", target=1024), make_task("e2", "EarnGold", amount=50))
    assert overlap(train, eval_cur, "predicates") == 0.5
    assert overlap(train, eval_cur, "full") == 0.0


def test_overlap_identical_curricula_is_one():
    tasks = [make_task("a", "TickGE", target=5), make_task("b", "EarnGold", amount=9)]
    shadow = [
        make_task("a2", "TickGE", target=5, weight=3),
        make_task("b2", "EarnGold", amount=9),
    ]
    assert overlap(_cur(*tasks), _cur(*shadow), "predicates") == 1.0
    assert overlap(_cur(*tasks), _cur(*shadow), "full") == 1.0


def test_overlap_range_and_disjoint():
    train = _cur(make_task("a", "TickGE", target=5))
    eval_cur = _cur(make_task("b", "EarnGold", amount=5), make_task("c", "DefeatEntity", n=1))
    assert overlap(train, eval_cur, "predicates") == 0.0
    assert overlap(train, eval_cur, "full") == 0.0
    with pytest.raises(ValueError):
        overlap(train, eval_cur, "both")


def test_bundled_corpus_full_below_predicates(bundled_corpora):
    train, eval_cur = bundled_corpora
    assert len(train) == 120 and len(eval_cur) == 12
    pred = overlap(train, eval_cur, "predicates")
    full = overlap(train, eval_cur, "full")
    assert full < pred


@pytest.fixture
def bundled_corpora():
    import importlib.resources

    files = importlib.resources.files("gridarena.data")
    train = parse_task_file(files.joinpath("train_tasks.txt").read_text("utf-8"))
    eval_cur = parse_task_file(files.joinpath("eval_tasks.txt").read_text("utf-8"))
    return train, eval_cur


# ----------------------------------------------------------------------- PCA


def test_pca_collinear_second_variance_zero():
    t = np.linspace(-1, 1, 9)
    points = np.stack([2 * t + 1, -3 * t + 4], axis=1)
    _, _, variances = pca_project(points, k=2)
    assert variances[1] == pytest.approx(0.0, abs=1e-8)


def test_pca_matches_dense_eigensolver_oracle():
    rng = np.random.default_rng(123)
    data = rng.normal(size=(10, 5))
    components, projected, variances = pca_project(data, k=3)
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (len(data) - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    for i in range(3):
        oracle_vec = eigenvectors[:, order[i]]
        assert variances[i] == pytest.approx(eigenvalues[order[i]], abs=1e-6)
        sign = np.sign(np.dot(oracle_vec, components[i])) or 1.0
        assert np.allclose(components[i], sign * oracle_vec, atol=1e-6)
    assert np.allclose(projected, centered @ components.T)


def test_pca_components_orthonormal_and_variances_sorted():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(40, 8))
    components, _, variances = pca_project(data, k=4)
    gram = components @ components.T
    assert np.allclose(gram, np.eye(4), atol=1e-6)
    assert np.all(np.diff(variances) <= 1e-12)


def test_pca_requires_k_plus_one_vectors():
    with pytest.raises(ValueError):
        pca_project(np.zeros((2, 4)), k=2)


def test_pca_beats_random_orthonormal_projections():
    rng = np.random.default_rng(77)
    data = rng.normal(size=(25, 6)) @ np.diag([4.0, 2.5, 1.0, 0.5, 0.2, 0.1])
    components, projected, _ = pca_project(data, k=2)
    centered = data - data.mean(axis=0)
    best = projected.var(axis=0, ddof=1).sum()
    for _ in range(1000):
        raw = rng.normal(size=(6, 2))
        q, _ = np.linalg.qr(raw)
        variance = (centered @ q).var(axis=0, ddof=1).sum()
        assert variance <= best + 1e-9


def test_pca_cluster_distances_on_bundled_corpus(bundled_corpora):
    train, eval_cur = bundled_corpora
    combined = Curriculum(train.tasks + eval_cur.tasks)
    vectors = embed_curriculum(combined)
    _, projected, _ = pca_project(vectors, k=2)
    predicates = [t.predicate for t in combined.tasks]
    intra, inter = [], []
    for i in range(len(predicates)):
        for j in range(i + 1, len(predicates)):
            d = float(np.linalg.norm(projected[i] - projected[j]))
            (intra if predicates[i] == predicates[j] else inter).append(d)
    assert np.mean(intra) < np.mean(inter)


def test_pca_csv_shape(bundled_corpora):
    train, _ = bundled_corpora
    text = pca_csv(train)
    lines = text.strip().splitlines()
    assert lines[0] == "task_name,predicate,x,y"
    assert len(lines) == len(train) + 1
    first = lines[1].split(",")
    assert first[0] == train.tasks[0].name and first[1] == train.tasks[0].predicate
    float(first[2]), float(first[3])
