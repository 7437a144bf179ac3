"""Gaussian mixture fitting over augmented states.

The mixture is initialized either from annotated demonstrations (one
component per gesture label, estimated from the labeled rows) or by
seeded k-means++, then refined with EM on the unlabeled data. Components
keep full covariance matrices: with a one-step window the cross-block
covariance between x(t) and x(t+1) is what encodes the per-gesture linear
regime, so diagonal covariances would discard the very structure being
clustered.

All likelihood computations run in the log domain with max-subtraction;
covariances are regularized with a scale-relative ridge at initialization
and after every M-step so Cholesky factorizations always succeed.
"""

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg as _linalg

REG_SCALE = 1e-6  # ridge = REG_SCALE * mean diagonal entry
REG_FLOOR = 1e-12  # absolute fallback for exactly-zero covariances
KMEANS_MAX_ITER = 100


class NumericalError(RuntimeError):
    """Raised when a fit degenerates (non-finite likelihood, singular covariance)."""


@dataclass
class GmmComponent:
    mean: np.ndarray
    covariance: np.ndarray
    weight: float
    label: str | None = None


@dataclass
class GmmModel:
    components: list[GmmComponent]
    dimension: int
    fit_trace: list[float] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def has_labels(self) -> bool:
        return all(c.label is not None for c in self.components)

    def component_name(self, k: int) -> str:
        label = self.components[k].label
        return label if label is not None else f"cluster_{k}"


def _as_matrix(X) -> np.ndarray:
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("expected a 2-D sample matrix")
    return values


def regularize_covariance(cov: np.ndarray) -> np.ndarray:
    """Symmetrize and add the scale-relative ridge eps * I."""
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    eps = REG_SCALE * float(np.mean(np.diag(cov)))
    if eps <= 0:
        eps = REG_FLOOR
    return cov + eps * np.eye(cov.shape[0])


def _class_component(rows: np.ndarray, weight: float, label: str | None) -> GmmComponent:
    mean = rows.mean(axis=0)
    diff = rows - mean
    cov = diff.T @ diff / rows.shape[0]
    return GmmComponent(
        mean=mean,
        covariance=regularize_covariance(cov),
        weight=weight,
        label=label,
    )


def weak_init(
    labeled: Sequence[tuple[object, Sequence[str]]],
) -> GmmModel:
    """Initial mixture from annotated demonstrations.

    One component per distinct label; mean, covariance and weight are the
    empirical statistics of that label's rows pooled over all the given
    demonstrations.
    """
    if not labeled:
        raise ValueError("need at least one labeled demonstration")
    matrices = []
    all_labels = []
    dim = None
    for X, labels in labeled:
        values = _as_matrix(X)
        labels = list(labels)
        if len(labels) != values.shape[0]:
            raise ValueError("label count does not match row count")
        if dim is None:
            dim = values.shape[1]
        elif values.shape[1] != dim:
            raise ValueError(
                f"dimension mismatch across demonstrations ({values.shape[1]} vs {dim})"
            )
        matrices.append(values)
        all_labels.extend(labels)
    data = np.vstack(matrices)
    labels = np.array(all_labels, dtype=object)
    total = data.shape[0]

    components = []
    for name in sorted(set(all_labels)):
        rows = data[labels == name]
        if rows.shape[0] < 2:
            raise ValueError(
                f"label {name!r} has only {rows.shape[0]} row(s); need at least 2"
            )
        components.append(_class_component(rows, rows.shape[0] / total, name))
    if not components:
        raise ValueError("no labeled rows in any demonstration")
    return GmmModel(components=components, dimension=dim)


def kmeans_init(X, k: int, seed: int) -> GmmModel:
    """Anonymous mixture from seeded k-means++ plus Lloyd iterations.

    Cluster identities are unknown, so component labels stay unset. An
    empty cluster is re-seeded deterministically with the point currently
    farthest from its assigned centroid.
    """
    data = _as_matrix(X)
    n, dim = data.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least {k} rows, got {n}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_seeds(data, k, rng)

    assignment = None
    for _ in range(KMEANS_MAX_ITER):
        dist2 = _sqdist(data, centers)
        new_assignment = np.argmin(dist2, axis=1)
        new_assignment = _fix_empty_clusters(new_assignment, dist2, k)
        if assignment is not None and np.array_equal(assignment, new_assignment):
            break
        assignment = new_assignment
        for j in range(k):
            centers[j] = data[assignment == j].mean(axis=0)

    components = [
        _class_component(data[assignment == j], np.sum(assignment == j) / n, None)
        for j in range(k)
    ]
    return GmmModel(components=components, dimension=dim)


def _kmeans_pp_seeds(data: np.ndarray, k: int, rng) -> np.ndarray:
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    closest = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[j] = data[idx]
        closest = np.minimum(closest, np.sum((data - centers[j]) ** 2, axis=1))
    return centers


def _sqdist(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return (
        np.sum(data**2, axis=1)[:, None]
        - 2.0 * data @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )


def _fix_empty_clusters(assignment, dist2, k):
    counts = np.bincount(assignment, minlength=k)
    if np.all(counts > 0):
        return assignment
    assignment = assignment.copy()
    own = dist2[np.arange(len(assignment)), assignment].copy()
    for j in np.flatnonzero(counts == 0):
        # Farthest point whose donor cluster keeps at least one member.
        order = np.argsort(-own, kind="stable")
        for farthest in order:
            donor = assignment[farthest]
            if counts[donor] > 1:
                break
        else:
            raise NumericalError("cannot repopulate empty cluster")
        counts[donor] -= 1
        counts[j] += 1
        assignment[farthest] = j
        own[farthest] = -np.inf  # a re-seeded point cannot move again
    return assignment


def _log_densities(model: GmmModel, data: np.ndarray) -> np.ndarray:
    """N x K matrix of log(w_k) + log N(x; mu_k, C_k) via Cholesky solves."""
    n, dim = data.shape
    out = np.empty((n, model.n_components))
    const = -0.5 * dim * np.log(2.0 * np.pi)
    for k, comp in enumerate(model.components):
        try:
            L = np.linalg.cholesky(comp.covariance)
        except np.linalg.LinAlgError:
            raise NumericalError(
                f"covariance of component {k} is not positive definite"
            ) from None
        z = _linalg.solve_triangular(L, (data - comp.mean).T, lower=True)
        logdet = np.sum(np.log(np.diag(L)))
        out[:, k] = (
            np.log(comp.weight) + const - logdet - 0.5 * np.sum(z**2, axis=0)
        )
    return out


def _logsumexp_rows(logs: np.ndarray) -> np.ndarray:
    m = np.max(logs, axis=1)
    return m + np.log(np.sum(np.exp(logs - m[:, None]), axis=1))


def log_likelihood(model: GmmModel, X) -> float:
    """Total log-density of the data under the mixture."""
    data = _as_matrix(X)
    if data.shape[1] != model.dimension:
        raise ValueError(
            f"data dimension {data.shape[1]} does not match model {model.dimension}"
        )
    return float(np.sum(_logsumexp_rows(_log_densities(model, data))))


def responsibilities(model: GmmModel, X) -> np.ndarray:
    """Posterior component probabilities per row (rows sum to 1)."""
    data = _as_matrix(X)
    if data.shape[1] != model.dimension:
        raise ValueError(
            f"data dimension {data.shape[1]} does not match model {model.dimension}"
        )
    logs = _log_densities(model, data)
    return np.exp(logs - _logsumexp_rows(logs)[:, None])


def em_fit(X, init: GmmModel, tol: float = 1e-6, max_iter: int = 300) -> GmmModel:
    """Refine a mixture by EM until the relative log-likelihood change
    drops below tol or max_iter iterations are reached.

    Component order and labels are carried over from the initial model
    unchanged; the per-iteration log-likelihood lands in fit_trace. A
    component whose responsibility mass underflows is frozen for that
    iteration rather than divided by ~0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    data = _as_matrix(X)
    n, dim = data.shape
    if dim != init.dimension:
        raise ValueError(
            f"data dimension {dim} does not match init model {init.dimension}"
        )
    model = GmmModel(
        components=[
            GmmComponent(c.mean.copy(), c.covariance.copy(), c.weight, c.label)
            for c in init.components
        ],
        dimension=dim,
        fit_trace=[],
    )
    mass_floor = 10.0 * dim * np.finfo(float).eps
    prev_ll = None
    for iteration in range(max_iter):
        logs = _log_densities(model, data)
        norm = _logsumexp_rows(logs)
        ll = float(np.sum(norm))
        if not np.isfinite(ll):
            raise NumericalError(
                f"non-finite log-likelihood at iteration {iteration}"
            )
        model.fit_trace.append(ll)
        if prev_ll is not None and abs(ll - prev_ll) <= tol * max(abs(prev_ll), 1.0):
            break
        prev_ll = ll

        resp = np.exp(logs - norm[:, None])
        mass = resp.sum(axis=0)
        for k, comp in enumerate(model.components):
            if mass[k] < mass_floor:
                continue  # frozen this iteration
            mean = resp[:, k] @ data / mass[k]
            diff = data - mean
            cov = (resp[:, k, None] * diff).T @ diff / mass[k]
            comp.mean = mean
            comp.covariance = regularize_covariance(cov)
        floored = np.maximum(mass, mass_floor)
        new_weights = floored / floored.sum()
        for k, comp in enumerate(model.components):
            comp.weight = float(new_weights[k])
    return model


def predict_labels(model: GmmModel, X) -> tuple[list[str], np.ndarray]:
    """Most likely component per row, plus the full posterior matrix.

    Ties go to the lowest component index. Components without a label get
    the synthetic name "cluster_<index>".
    """
    post = responsibilities(model, X)
    best = np.argmax(post, axis=1)
    return [model.component_name(k) for k in best], post


@dataclass(frozen=True)
class TransitionPoint:
    row: int
    vector: np.ndarray
    from_label: str
    to_label: str


def transition_points(labels: Sequence[str], X) -> list[TransitionPoint]:
    """Label-change events: one entry at each t with label(t) != label(t+1),
    carrying the feature vector at t+1."""
    data = _as_matrix(X)
    labels = list(labels)
    if len(labels) != data.shape[0]:
        raise ValueError("label count does not match row count")
    return [
        TransitionPoint(t, data[t + 1], labels[t], labels[t + 1])
        for t in range(len(labels) - 1)
        if labels[t] != labels[t + 1]
    ]


def dumps_model(model: GmmModel) -> str:
    """Self-describing JSON; floats serialize at full round-trip precision."""
    doc = {
        "format": "kinseg-gmm",
        "version": 1,
        "dimension": model.dimension,
        "components": [
            {
                "label": c.label,
                "weight": float(c.weight),
                "mean": [float(v) for v in c.mean],
                "covariance": [[float(v) for v in row] for row in c.covariance],
            }
            for c in model.components
        ],
        "fit_trace": [float(v) for v in model.fit_trace],
    }
    return json.dumps(doc, indent=2) + "\n"


def loads_model(text: str) -> GmmModel:
    doc = json.loads(text)
    if doc.get("format") != "kinseg-gmm":
        raise ValueError("not a mixture model file")
    components = [
        GmmComponent(
            mean=np.array(c["mean"], dtype=float),
            covariance=np.array(c["covariance"], dtype=float),
            weight=float(c["weight"]),
            label=c["label"],
        )
        for c in doc["components"]
    ]
    return GmmModel(
        components=components,
        dimension=int(doc["dimension"]),
        fit_trace=[float(v) for v in doc["fit_trace"]],
    )


def save_model(model: GmmModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path) -> GmmModel:
    with open(path) as fh:
        return loads_model(fh.read())
