"""Deterministic task embeddings, curriculum overlap, and PCA projection.

The embedder hashes the task's source text tokens into signed unit vectors:
the predicate-name token carries weight 4 and each argument token weight 1,
so same-predicate tasks share a dominant direction while distinct predicates
land nearly orthogonal.
"""

from __future__ import annotations

import re

import numpy as np

from .tasks import Curriculum, TaskSpec

DEFAULT_DIM = 64
PREDICATE_TOKEN_WEIGHT = 4.0
ARGUMENT_TOKEN_WEIGHT = 1.0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over a byte string."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _sign_vector(token: str, dim: int) -> np.ndarray:
    """Deterministic +-1 vector keyed by the token's FNV hash."""
    out = np.empty(dim, dtype=np.float64)
    state = fnv1a64(token.encode("utf-8"))
    filled = 0
    while filled < dim:
        state, bits = _splitmix64(state)
        take = min(64, dim - filled)
        for b in range(take):
            out[filled + b] = 1.0 if (bits >> b) & 1 else -1.0
        filled += take
    return out


_CALL_RE = re.compile(r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<args>.*)\)\s*$")


def _tokenize(source_text: str) -> list[tuple[str, float]]:
    match = _CALL_RE.match(source_text)
    if match:
        tokens = [(match.group("name"), PREDICATE_TOKEN_WEIGHT)]
        args = match.group("args").strip()
        if args:
            for part in args.split(","):
                tokens.append((part.strip(), ARGUMENT_TOKEN_WEIGHT))
        return tokens
    # Arbitrary text: first word is dominant, the rest are arguments.
    words = re.findall(r"[A-Za-z0-9_=\-]+", source_text)
    if not words:
        raise ValueError("cannot embed empty text")
    return [(words[0], PREDICATE_TOKEN_WEIGHT)] + [(w, ARGUMENT_TOKEN_WEIGHT) for w in words[1:]]


def embed_task(source_text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Unit-norm embedding; pure function of source_text."""
    if not source_text:
        raise ValueError("cannot embed empty text")
    vec = np.zeros(dim, dtype=np.float64)
    for token, weight in _tokenize(source_text):
        vec += weight * _sign_vector(token, dim)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return vec / norm


def embed_curriculum(curriculum: Curriculum, dim: int = DEFAULT_DIM) -> np.ndarray:
    return np.stack([embed_task(t.source_text, dim) for t in curriculum.tasks])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def overlap(train: Curriculum, eval_curriculum: Curriculum, mode: str = "predicates") -> float:
    """Fraction of eval tasks' keys present in the training curriculum."""
    if mode == "predicates":
        train_keys = {t.predicate for t in train.tasks}
        eval_keys = {t.predicate for t in eval_curriculum.tasks}
    elif mode == "full":
        train_keys = {t.full_key() for t in train.tasks}
        eval_keys = {t.full_key() for t in eval_curriculum.tasks}
    else:
        raise ValueError(f"overlap mode must be 'predicates' or 'full', got {mode!r}")
    return len(eval_keys & train_keys) / len(eval_keys)


def similarity_gap(tasks: list[TaskSpec], dim: int = DEFAULT_DIM) -> tuple[float, float]:
    """(mean intra-predicate cosine, mean inter-predicate cosine) over all pairs."""
    vectors = [embed_task(t.source_text, dim) for t in tasks]
    intra: list[float] = []
    inter: list[float] = []
    for i in range(len(tasks)):
        for j in range(i + 1, len(tasks)):
            sim = float(np.dot(vectors[i], vectors[j]))
            if tasks[i].predicate == tasks[j].predicate:
                intra.append(sim)
            else:
                inter.append(sim)
    return float(np.mean(intra)), float(np.mean(inter))


def pca_project(
    vectors: np.ndarray | list[np.ndarray],
    k: int = 2,
    tol: float = 1e-9,
    max_iterations: int = 10000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k PCA via power iteration with deflation.

    Returns (components (k, d) row-orthonormal, projected (n, k),
    explained_variance (k,) non-increasing). Requires at least k+1 vectors.
    """
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("expected a 2-D array of vectors")
    n, d = data.shape
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} vectors for k={k}, got {n}")

    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    scale = float(np.linalg.norm(cov))

    components = np.zeros((k, d), dtype=np.float64)
    variances = np.zeros(k, dtype=np.float64)
    work = cov.copy()
    for comp in range(k):
        # Deterministic pseudo-random start so we never begin orthogonal
        # to the dominant eigenvector.
        v = _sign_vector(f"pca-start-{comp}", d)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iterations):
            w = work @ v
            # Re-orthogonalize against found components; keeps orthonormality
            # tight even when deflation leaves numerical residue.
            for prev in range(comp):
                w -= np.dot(components[prev], w) * components[prev]
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                lam = 0.0
                break
            v_next = w / norm
            lam = float(v_next @ work @ v_next)
            converged = float(np.linalg.norm(work @ v_next - lam * v_next)) <= tol * max(scale, 1e-30)
            v = v_next
            if converged:
                break
        components[comp] = v
        variances[comp] = lam
        work = work - lam * np.outer(v, v)

    order = np.argsort(-variances, kind="stable")
    components = components[order]
    variances = variances[order]
    projected = centered @ components.T
    return components, projected, variances


def pca_csv(curriculum: Curriculum, dim: int = DEFAULT_DIM) -> str:
    """CSV of 2-D PCA coordinates: task_name,predicate,x,y."""
    vectors = embed_curriculum(curriculum, dim)
    _, projected, _ = pca_project(vectors, k=2)
    lines = ["task_name,predicate,x,y"]
    for task, (x, y) in zip(curriculum.tasks, projected):
        lines.append(f"{task.name},{task.predicate},{x:.10g},{y:.10g}")
    return "\n".join(lines) + "\n"
