"""Trainable aggregation descriptors: NetVLAD, NetRVLAD, SoftDBoW and NetFV.

A sequence of ``N`` descriptors ``x_i`` in R^D is summarized against ``K``
clusters. Cluster membership is the soft assignment

    a_k(x) = softmax_k(w_k . x + b_k)

and the descriptors are

    NetVLAD(j, k)  = sum_i a_k(x_i) (x_i(j) - c_k(j))
    NetRVLAD(j, k) = sum_i a_k(x_i) x_i(j)
    SoftDBoW(k)    = sum_i a_k(x_i)
    NetFV          = [FV1, FV2] with
        FV1(j, k) = sum_i a_k(x_i) (x_i(j) - c_k(j)) / s_k(j)
        FV2(j, k) = sum_i a_k(x_i) ((x_i(j) - c_k(j))**2 / s_k(j)**2 - 1)

Matrix outputs are flattened with ``j`` major and ``k`` minor. The scale
``s = eps + softplus(scale_raw)`` stays above ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, ShapeMismatch

KINDS = ("netvlad", "netrvlad", "softdbow", "netfv")
SCALE_EPS = 1e-3
PARAM_GROUPS = ("anchors", "assign_weights", "assign_bias", "scale_raw")


def softplus(z):
    return np.logaddexp(0.0, z)


def inverse_softplus(y):
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass
class ClusterParams:
    anchors: np.ndarray  # (K, D)
    assign_weights: np.ndarray  # (K, D)
    assign_bias: np.ndarray  # (K,)
    scale_raw: np.ndarray  # (K, D), NetFV only

    def __post_init__(self):
        self.anchors = np.array(self.anchors, dtype=np.float64, ndmin=2)
        k, d = self.anchors.shape
        self.assign_weights = np.array(self.assign_weights, dtype=np.float64).reshape(k, d)
        self.assign_bias = np.array(self.assign_bias, dtype=np.float64).reshape(k)
        if self.scale_raw is None:
            self.scale_raw = np.full((k, d), inverse_softplus(1.0 - SCALE_EPS))
        self.scale_raw = np.array(self.scale_raw, dtype=np.float64).reshape(k, d)
        if k < 1:
            raise ShapeMismatch("need at least one cluster")
        for name in PARAM_GROUPS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise NonFiniteInput(f"non-finite values in {name}")

    @property
    def n_clusters(self) -> int:
        return self.anchors.shape[0]

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    @property
    def scale(self) -> np.ndarray:
        return SCALE_EPS + softplus(self.scale_raw)

    @classmethod
    def zeros(cls, n_clusters, dim, scale=1.0):
        """Zero anchors and assignment logits (uniform assignment), constant scale."""
        return cls(
            np.zeros((n_clusters, dim)),
            np.zeros((n_clusters, dim)),
            np.zeros(n_clusters),
            np.full((n_clusters, dim), inverse_softplus(scale - SCALE_EPS)),
        )

    @classmethod
    def from_anchors(cls, anchors, alpha=1.0):
        """VLAD-style init: w_k = 2 alpha c_k, b_k = -alpha ||c_k||^2, unit scale."""
        c = np.array(anchors, dtype=np.float64, ndmin=2)
        return cls(c, 2.0 * alpha * c, -alpha * (c**2).sum(axis=1), None)

    @classmethod
    def random(cls, rng, n_clusters, dim, weight_scale=0.5):
        """Random parameters for tests; ``rng`` is a ``numpy.random.Generator``."""
        return cls(
            rng.normal(size=(n_clusters, dim)),
            weight_scale * rng.normal(size=(n_clusters, dim)),
            rng.normal(size=n_clusters),
            inverse_softplus(rng.uniform(0.6, 1.8, size=(n_clusters, dim))),
        )

    def copy(self):
        return ClusterParams(
            self.anchors.copy(), self.assign_weights.copy(), self.assign_bias.copy(), self.scale_raw.copy()
        )

    def to_dict(self):
        out = {}
        for name in PARAM_GROUPS:
            a = getattr(self, name)
            out[name] = {"shape": list(a.shape), "data": a.ravel().tolist()}
        return out

    @classmethod
    def from_dict(cls, d):
        arrays = {}
        for name in PARAM_GROUPS:
            entry = d[name]
            arrays[name] = np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        return cls(**arrays)


def output_size(kind: str, n_clusters: int, dim: int) -> int:
    kind = _check_kind(kind)
    return {"netvlad": dim * n_clusters, "netrvlad": dim * n_clusters,
            "softdbow": n_clusters, "netfv": 2 * dim * n_clusters}[kind]


def _check_kind(kind):
    k = kind.lower()
    if k not in KINDS:
        raise ValueError(f"unknown aggregation kind {kind!r}; expected one of {KINDS}")
    return k


def _check_seq(x, params):
    x = np.array(x, dtype=np.float64, ndmin=2)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeMismatch("descriptor sequence must be a nonempty (N, D) matrix")
    if x.shape[1] != params.dim:
        raise ShapeMismatch(f"descriptor dim {x.shape[1]} != cluster dim {params.dim}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("descriptor sequence contains non-finite values")
    return x


def soft_assign(x, params: ClusterParams) -> np.ndarray:
    """Softmax over clusters of ``w_k . x + b_k``; rows of a matrix input are independent."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("non-finite descriptor")
    logits = x @ params.assign_weights.T + params.assign_bias
    logits = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=-1, keepdims=True)


# --- normalization (intra per-cluster L2, then global L2) ---------------------

_NORM_FLOOR = 1e-12


def _l2(v, axis):
    n = np.sqrt((v * v).sum(axis=axis, keepdims=True))
    return v / np.maximum(n, _NORM_FLOOR), n


def _l2_backward(out, norm, g, axis):
    dot = (out * g).sum(axis=axis, keepdims=True)
    return np.where(norm > _NORM_FLOOR, (g - out * dot) / np.maximum(norm, _NORM_FLOOR), g / _NORM_FLOOR)


def _normalize(kind, raw, k):
    cache = {}
    v = raw
    if kind != "softdbow":
        blocks = raw.reshape(2 if kind == "netfv" else 1, -1, k)
        intra, n1 = _l2(blocks, axis=1)
        cache["intra"] = (intra, n1)
        v = intra.reshape(-1)
    out, n2 = _l2(v, axis=0)
    cache["global"] = (out, n2)
    return out, cache


def _normalize_backward(kind, g, cache, k):
    out, n2 = cache["global"]
    g = _l2_backward(out, n2, g, axis=0)
    if kind != "softdbow":
        intra, n1 = cache["intra"]
        g = _l2_backward(intra, n1, g.reshape(intra.shape), axis=1).reshape(-1)
    return g


# --- forward -------------------------------------------------------------------


def _raw_forward(kind, x, params):
    a = soft_assign(x, params)  # (N, K)
    if kind == "softdbow":
        return a.sum(axis=0), a
    if kind == "netrvlad":
        return (x.T @ a).ravel(), a
    c = params.anchors
    if kind == "netvlad":
        return (x.T @ a - c.T * a.sum(axis=0)).ravel(), a
    s = params.scale
    z = (x[:, :, None] - c.T[None]) / s.T[None]  # (N, D, K)
    fv1 = np.einsum("nk,ndk->dk", a, z)
    fv2 = np.einsum("nk,ndk->dk", a, z * z - 1.0)
    return np.concatenate([fv1.ravel(), fv2.ravel()]), a


def aggregate(kind: str, seq, params: ClusterParams, normalize: bool = False) -> np.ndarray:
    """Forward pass of descriptor ``kind`` over one ``(N, D)`` sequence."""
    kind = _check_kind(kind)
    x = _check_seq(seq, params)
    raw, _ = _raw_forward(kind, x, params)
    if normalize:
        raw, _ = _normalize(kind, raw, params.n_clusters)
    return raw


def netvlad_forward(seq, params, normalize=False):
    return aggregate("netvlad", seq, params, normalize)


def netrvlad_forward(seq, params, normalize=False):
    return aggregate("netrvlad", seq, params, normalize)


def softdbow_forward(seq, params, normalize=False):
    return aggregate("softdbow", seq, params, normalize)


def netfv_forward(seq, params, normalize=False):
    return aggregate("netfv", seq, params, normalize)


# --- backward ------------------------------------------------------------------


@dataclass
class Gradients:
    descriptors: np.ndarray
    anchors: np.ndarray
    assign_weights: np.ndarray
    assign_bias: np.ndarray
    scale: np.ndarray
    scale_raw: np.ndarray

    def group(self, name):
        return getattr(self, name)


def backward(kind: str, seq, params: ClusterParams, upstream, normalize: bool = False) -> Gradients:
    """Gradients of ``upstream . aggregate(kind, seq, params)``.

    Returns gradients for the descriptors and every parameter group; ``scale``
    is the gradient with respect to ``s`` itself and ``scale_raw`` the one
    with respect to its free parameter.
    """
    kind = _check_kind(kind)
    x = _check_seq(seq, params)
    k, d = params.n_clusters, params.dim
    g = np.asarray(upstream, dtype=np.float64).ravel()
    if g.size != output_size(kind, k, d):
        raise ShapeMismatch(f"upstream has {g.size} entries, {kind} output has {output_size(kind, k, d)}")

    raw, a = _raw_forward(kind, x, params)
    if normalize:
        _, cache = _normalize(kind, raw, k)
        g = _normalize_backward(kind, g, cache, k)

    dx = np.zeros_like(x)
    dc = np.zeros((k, d))
    ds = np.zeros((k, d))
    if kind == "softdbow":
        da = np.broadcast_to(g, a.shape).copy()
    elif kind == "netrvlad":
        gm = g.reshape(d, k)
        dx += a @ gm.T
        da = x @ gm
    elif kind == "netvlad":
        gm = g.reshape(d, k)
        c = params.anchors
        dx += a @ gm.T
        da = x @ gm - (c * gm.T).sum(axis=1)
        dc = -(gm * a.sum(axis=0)).T
    else:
        g1 = g[: d * k].reshape(d, k)
        g2 = g[d * k :].reshape(d, k)
        c, s = params.anchors, params.scale
        z = (x[:, :, None] - c.T[None]) / s.T[None]
        da = np.einsum("dk,ndk->nk", g1, z) + np.einsum("dk,ndk->nk", g2, z * z - 1.0)
        dz = a[:, None, :] * (g1[None] + 2.0 * g2[None] * z)  # (N, D, K)
        dz_s = dz / s.T[None]
        dx += dz_s.sum(axis=2)
        dc = -dz_s.sum(axis=0).T
        ds = -(dz_s * z).sum(axis=0).T

    # softmax backward, then through the affine assignment logits
    dlogits = a * (da - (a * da).sum(axis=1, keepdims=True))
    dw = dlogits.T @ x
    db = dlogits.sum(axis=0)
    dx += dlogits @ params.assign_weights
    return Gradients(dx, dc, dw, db, ds, ds * sigmoid(params.scale_raw))
