"""Central finite-difference checks of the aggregation gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregation import KINDS, ClusterParams, _raw_forward, _normalize, backward, output_size

STEP = 1e-5
REL_TOL = 1e-5
ABS_TOL = 1e-8
GROUPS = ("descriptors", "anchors", "assign_weights", "assign_bias", "scale", "scale_raw")


@dataclass
class GroupResult:
    kind: str
    group: str
    n_instances: int
    n_coords: int
    max_rel_error: float
    worst: dict

    @property
    def passed(self) -> bool:
        return self.worst.get("ok", True)

    def to_dict(self):
        return {
            "kind": self.kind,
            "group": self.group,
            "instances": self.n_instances,
            "coords": self.n_coords,
            "max_rel_error": self.max_rel_error,
            "passed": self.passed,
            "worst": self.worst,
        }


def coord_error(analytic, numeric):
    """(relative error, ok) for one coordinate under the rel/abs tolerance rule."""
    diff = abs(analytic - numeric)
    scale = max(abs(analytic), abs(numeric))
    rel = diff / scale if scale > 0 else 0.0
    return rel, (rel < REL_TOL or diff < ABS_TOL)


def _objective(kind, x, params, sigma, upstream, normalize):
    # forward with the scale overridden, so the scale group is checked directly
    if sigma is not None:
        params = _SigmaOverride(params, sigma)
    raw, _ = _raw_forward(kind, x, params)
    if normalize:
        raw, _ = _normalize(kind, raw, params.n_clusters)
    return float(upstream @ raw)


class _SigmaOverride:
    def __init__(self, params, sigma):
        self._p = params
        self.scale = sigma

    def __getattr__(self, name):
        return getattr(self._p, name)


def random_instance(rng, kind, max_dim=8, max_clusters=4, max_len=10):
    d = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_clusters + 1))
    n = int(rng.integers(1, max_len + 1))
    x = rng.normal(size=(n, d))
    params = ClusterParams.random(rng, k, d)
    upstream = rng.normal(size=output_size(kind, k, d))
    return x, params, upstream


def check_instance(kind, x, params, upstream, normalize=False, h=STEP, perturb=0.0):
    """Compare every gradient coordinate with a central difference.

    Returns ``{group: list of (index, analytic, numeric)}``. ``perturb`` adds
    a constant to every analytic coordinate (negative-control hook).
    """
    grads = backward(kind, x, params, upstream, normalize)
    out = {}
    for group in GROUPS:
        analytic = grads.group(group) + perturb
        rows = []
        for idx in np.ndindex(analytic.shape):
            def f(delta):
                xx, pp, sigma = x, params, None
                if group == "descriptors":
                    xx = x.copy()
                    xx[idx] += delta
                elif group == "scale":
                    sigma = params.scale.copy()
                    sigma[idx] += delta
                else:
                    pp = params.copy()
                    getattr(pp, group)[idx] += delta
                return _objective(kind, xx, pp, sigma, upstream, normalize)

            numeric = (f(h) - f(-h)) / (2.0 * h)
            rows.append((idx, float(analytic[idx]), numeric))
        out[group] = rows
    return out


def run_gradcheck(kinds=KINDS, seed=0, n_instances=20, normalize=False, perturb=0.0):
    """Check ``n_instances`` random instances per kind; one result per (kind, group)."""
    results = []
    for kind in kinds:
        rng = np.random.default_rng([seed, KINDS.index(kind)])
        stats = {g: {"coords": 0, "max": 0.0, "worst": {"ok": True, "rel_error": 0.0}} for g in GROUPS}
        for inst in range(n_instances):
            x, params, upstream = random_instance(rng, kind)
            for group, rows in check_instance(kind, x, params, upstream, normalize, perturb=perturb).items():
                st = stats[group]
                for idx, a, num in rows:
                    rel, ok = coord_error(a, num)
                    st["coords"] += 1
                    st["max"] = max(st["max"], rel)
                    bad_first = st["worst"]["ok"] and not ok
                    if bad_first or (ok == st["worst"]["ok"] and rel > st["worst"]["rel_error"]):
                        st["worst"] = {
                            "ok": ok,
                            "instance": inst,
                            "index": list(idx),
                            "analytic": a,
                            "numeric": num,
                            "rel_error": rel,
                        }
        for group in GROUPS:
            st = stats[group]
            results.append(GroupResult(kind, group, n_instances, st["coords"], st["max"], st["worst"]))
    return results


def format_table(results) -> str:
    lines = [f"{'kind':<9} {'group':<15} {'coords':>6} {'max_rel_err':>12}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.kind:<9} {r.group:<15} {r.n_coords:>6} {r.max_rel_error:>12.3e}  {status}")
    return "\n".join(lines)
