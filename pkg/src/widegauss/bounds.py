"""Fully explicit Wasserstein error bounds for the wide-network limit.

Every constant in the final bound is computable from the weight moments,
the activation's Lipschitz data, and the input norms; nothing is hidden in
an unspecified constant.  The chain assembles, per layer transition:

  * a gaussianization term: cost of swapping the general weights of the
    layer for Gaussian ones (third-moment CLT error over the fan-in);
  * a variance term: concentration of the random empirical covariance of
    the previous layer around its mean;
  * a mixture-to-limit term: cost of replacing the previous layer's
    empirical covariance by the limit kernel, paid through smooth-metric
    distances of the previous layer (certificate mode) or through measured
    moment statistics (measurement mode);

then converts the resulting third-order smooth-metric bound into a
Wasserstein-1 bound by Gaussian smoothing, and feeds the result forward to
the next layer over all input pairs.  Certificate mode is rigorous whenever
the recorded validity flags hold; measurement mode replaces moment bounds
by Monte Carlo estimates and is statistical by nature, so it never marks
its result as certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelMatrix, gaussian_expectation, kernel_recursion
from .network import InputSet, NetworkConfig
from .weights import moment_constant

__all__ = [
    "PARTITION_CAP",
    "MomentLedger",
    "LedgerError",
    "SmoothingDomainError",
    "CertificatePair",
    "MeasuredPair",
    "BoundReport",
    "combinatorial_constant",
    "ledger_from_config",
    "moment_bound",
    "pair_mismatch_constant",
    "pair_cross_constant",
    "gaussianization_term",
    "mixture_to_limit_term",
    "moment_difference_bound",
    "smooth_to_wasserstein",
    "rate_exponent",
    "rate_bound",
    "bound_chain",
]

# Largest p for the partition count; the constant grows superexponentially
# and larger values have no practical use in the bounds.
PARTITION_CAP = 15


class LedgerError(ValueError):
    """Moment ledger violates a hypothesis of the bounds."""


class SmoothingDomainError(ValueError):
    """Smooth-metric value outside the domain of the smoothing conversion."""


def combinatorial_constant(p: int) -> int:
    """Number of set partitions of {1..2p} with every block of size >= 2.

    This counts the index patterns that survive independence when a 2p-th
    moment of a sum expands, hence multiplies n^p in the moment bounds.
    Computed by the standard recurrence a(n) = sum_k C(n-1, k-1) a(n-k).
    """
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    if p > PARTITION_CAP:
        raise ValueError(f"p={p} exceeds the supported cap {PARTITION_CAP}")
    n_max = 2 * int(p)
    counts = [1, 0]
    for n in range(2, n_max + 1):
        counts.append(
            sum(math.comb(n - 1, k - 1) * counts[n - k] for k in range(2, n + 1))
        )
    return counts[n_max]


@dataclass(frozen=True)
class MomentLedger:
    """Exact (or user-supplied) moment constants entering the bounds.

    c2 has one entry per layer (0..L-1); c2p one per layer 0..L-2; c3_last
    is the third absolute moment constant of the final layer's weights.
    x_l1 are the input l1 norms, one per input point.
    """

    p: int
    c2: tuple[float, ...]
    c2p: tuple[float, ...]
    c3_last: float
    lip: float
    sigma0: float
    x_l1: tuple[float, ...]
    n0: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or self.p <= 2:
            raise LedgerError(f"p must be an integer greater than 2, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "c2", tuple(float(v) for v in self.c2))
        object.__setattr__(self, "c2p", tuple(float(v) for v in self.c2p))
        object.__setattr__(self, "x_l1", tuple(float(v) for v in self.x_l1))
        if len(self.c2) != len(self.c2p) + 1:
            raise LedgerError("need one c2 entry per layer and one c2p entry per layer but the last")
        if any(not (v > 0 and math.isfinite(v)) for v in self.c2):
            raise LedgerError("c2 entries must be positive and finite")
        if any(v < 1.0 for v in self.c2p):
            raise LedgerError(
                f"normalized 2p-th moments must satisfy c2p >= 1, got {self.c2p}"
            )
        if not (self.c3_last > 0 and math.isfinite(self.c3_last)):
            raise LedgerError("c3_last must be positive and finite")
        if not (self.lip > 0 and math.isfinite(self.lip)):
            raise LedgerError("lip must be positive and finite")
        if self.sigma0 < 0:
            raise LedgerError("sigma0 is an absolute value and must be nonnegative")
        if any(v < 0 for v in self.x_l1):
            raise LedgerError("input l1 norms must be nonnegative")
        if self.n0 < 1:
            raise LedgerError("n0 must be a positive integer")

    @property
    def depth(self) -> int:
        return len(self.c2)

    @property
    def s(self) -> int:
        return len(self.x_l1)


def ledger_from_config(
    config: NetworkConfig,
    chi: InputSet,
    p: int,
    overrides: dict | None = None,
) -> MomentLedger:
    """Ledger with exact closed-form moment constants for a configuration.

    ``overrides`` may replace any field (e.g. looser user-certified moment
    caps) before validation.
    """
    depth = config.depth
    values = {
        "p": p,
        "c2": tuple(moment_constant(sp, 2) for sp in config.weight_specs),
        "c2p": tuple(moment_constant(sp, 2 * p) for sp in config.weight_specs[: depth - 1]),
        "c3_last": moment_constant(config.weight_specs[depth - 1], 3),
        "lip": config.activation.lip,
        "sigma0": abs(config.activation.sigma0),
        "x_l1": tuple(chi.l1_norms()),
        "n0": chi.n0,
    }
    if overrides:
        unknown = set(overrides) - set(values)
        if unknown:
            raise LedgerError(f"unknown ledger overrides: {sorted(unknown)}")
        values.update(overrides)
    return MomentLedger(**values)


def moment_bound(layer: int, x_l1norm: float, ledger: MomentLedger, order: int | None = None) -> float:
    """Upper bound on E[sigma(F_1^layer(x))^(2*order)] (finite net and limit).

    ``order`` defaults to the ledger's p; order=1 gives the second-moment
    variant that multiplies the mismatch constants.  The bound is the
    layer-iterated product of the moment constants, the input norm clause,
    and the activation growth clause.
    """
    if layer < 1 or layer > ledger.depth - 1:
        raise ValueError(f"layer must be in [1, {ledger.depth - 1}], got {layer}")
    if x_l1norm < 0:
        raise ValueError("x_l1norm must be nonnegative")
    order = ledger.p if order is None else int(order)
    if order == ledger.p:
        constants = ledger.c2p
    elif order == 1:
        constants = ledger.c2
    else:
        raise ValueError(f"order must be 1 or the ledger's p={ledger.p}, got {order}")
    two_p = 2 * order
    leading = float(combinatorial_constant(order)) ** layer
    input_clause = max(
        constants[0] * x_l1norm**two_p / float(ledger.n0) ** order, 1.0
    )
    growth_clause = max((ledger.lip + ledger.sigma0) ** (two_p * layer), 1.0)
    iterated = 1.0
    for m in range(1, layer):
        iterated *= constants[m]
    return leading * input_clause * growth_clause * iterated


def pair_mismatch_constant(
    layer: int, xa_l1: float, xb_l1: float, ledger: MomentLedger
) -> float:
    """Constant converting a W1 distance into a covariance-mismatch bound."""
    b_max = max(
        moment_bound(layer, xa_l1, ledger), moment_bound(layer, xb_l1, ledger)
    )
    p = ledger.p
    return (
        2.0
        * math.sqrt(2.0)
        * (4.0 * math.sqrt(2.0) * b_max) ** (1.0 / (2 * p - 1))
        * ledger.lip ** ((2 * p - 2) / (2 * p - 1))
    )


def pair_cross_constant(
    layer: int, xa_l1: float, xb_l1: float, ledger: MomentLedger
) -> float:
    """Constant converting a 2-coordinate W1 distance into a cross-covariance bound."""
    b_max = max(
        moment_bound(layer, xa_l1, ledger), moment_bound(layer, xb_l1, ledger)
    )
    p = ledger.p
    return (
        4.0
        * (8.0 * b_max) ** (3.0 / (2 * p - 1))
        * ledger.lip ** ((2 * p - 4) / (2 * p - 1))
    )


def gaussianization_term(
    d: int, fan_in: int, c2: float, c3: float, third_moment_sum: float
) -> float:
    """Smooth-metric cost of swapping general layer weights for Gaussian ones.

    ``third_moment_sum`` aggregates E|sigma(previous layer)|^3 over the
    relevant input points (bounded or measured, per mode).
    """
    if d < 1 or fan_in < 1:
        raise ValueError("d and fan_in must be positive")
    if c2 <= 0 or c3 <= 0:
        raise ValueError("moment constants must be positive")
    if third_moment_sum < 0:
        raise ValueError("third_moment_sum must be nonnegative")
    return (2.0 * c2**1.5 + c3) / 6.0 * d / math.sqrt(fan_in) * third_moment_sum


@dataclass(frozen=True)
class CertificatePair:
    """Per-pair certificate inputs: constants times previous-level W1 powers."""

    mismatch_const: float
    cross_const: float
    b2_geomean: float
    w1_one: float
    w1_two: float


@dataclass(frozen=True)
class MeasuredPair:
    """Per-pair measured statistics of the previous layer's activations."""

    mismatch: float
    variance: float
    cross_covariance: float


def mixture_to_limit_term(
    d: int,
    fan_in: int,
    c2: float,
    pairs,
    mode: str,
    p: int | None = None,
) -> float:
    """Smooth-metric cost of replacing the previous layer's random empirical
    covariance by the limit kernel, summed over input pairs.

    certificate mode: each pair carries mismatch/cross constants and the
    previous level's W1 values, raised to the powers (2p-2)/(2p-1),
    (p-1)/(2p-1) and (p-2)/(2p-1).
    measurement mode: each pair carries the measured covariance mismatch,
    the variance of the activation product (divided here by the fan-in),
    and the cross-coordinate covariance of the products.
    """
    if d < 1 or fan_in < 1:
        raise ValueError("d and fan_in must be positive")
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    if mode not in ("certificate", "measurement"):
        raise ValueError(f"mode must be 'certificate' or 'measurement', got {mode!r}")
    total = 0.0
    if mode == "certificate":
        if p is None or p <= 2:
            raise ValueError("certificate mode needs the integer p > 2")
        e_one = (2 * p - 2) / (2 * p - 1)
        e_half = (p - 1) / (2 * p - 1)
        e_two = (p - 2) / (2 * p - 1)
        for term in pairs:
            if not isinstance(term, CertificatePair):
                raise ValueError("certificate mode expects CertificatePair terms")
            if min(term.w1_one, term.w1_two) < 0:
                raise ValueError("W1 values must be nonnegative")
            total += (
                term.mismatch_const * term.w1_one**e_one
                + 2.0 * term.mismatch_const * term.b2_geomean * term.w1_one**e_half
                + term.cross_const * term.w1_two**e_two
            )
    else:
        for term in pairs:
            if not isinstance(term, MeasuredPair):
                raise ValueError("measurement mode expects MeasuredPair terms")
            if term.variance < 0:
                raise ValueError("variance must be nonnegative")
            total += (
                abs(term.mismatch)
                + math.sqrt(term.variance / fan_in)
                + math.sqrt(max(term.cross_covariance, 0.0))
            )
    return c2 * d / 2.0 * total


def moment_difference_bound(d: int, q: int, moment_cap: float, w1_value: float) -> float:
    """Bound on |E prod X - E prod Z| over d coordinates from a W1 distance.

    ``moment_cap`` dominates the (q+d)-th absolute moments of both vectors'
    coordinates.  Tight in the W1 exponent q/(q+d-1) as w1_value -> 0.
    """
    if d < 1 or q < 1:
        raise ValueError("d and q must be positive integers")
    if moment_cap < 0 or w1_value < 0:
        raise ValueError("moment_cap and w1_value must be nonnegative")
    root_d = math.sqrt(d)
    exponent = (d - 1) / (q + d - 1)
    return 2.0 * root_d * (4.0 * root_d * moment_cap) ** exponent * w1_value ** (
        q / (q + d - 1)
    )


# Relative slack accepted on smoothing/power preconditions (pure float noise).
_FLAG_SLACK = 1e-12


def _smooth_value(smooth3_value: float, dim: int) -> float:
    return 2.0 * (2.0 * math.sqrt(dim)) ** (2.0 / 3.0) * smooth3_value ** (1.0 / 3.0)


def smooth_to_wasserstein(smooth3_value: float, dim: int) -> float:
    """Convert a third-order smooth-metric bound into a W1 bound.

    Valid exactly when ``smooth3_value <= 2 sqrt(dim)``; raises outside
    that domain.  At the domain endpoint the value is 4 sqrt(dim).
    """
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    if smooth3_value < 0:
        raise ValueError("smooth3_value must be nonnegative")
    threshold = 2.0 * math.sqrt(dim)
    if smooth3_value > threshold * (1.0 + _FLAG_SLACK):
        raise SmoothingDomainError(
            f"smooth-metric value {smooth3_value:.6g} exceeds the smoothing "
            f"domain threshold {threshold:.6g} for dimension {dim}"
        )
    return _smooth_value(smooth3_value, dim)


def rate_exponent(depth: int, m: int, p) -> float:
    """Decay exponent of hidden width m in the aggregate rate; in (0, 1/6]."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if not 1 <= m <= depth - 1:
        raise ValueError(f"m must be in [1, {depth - 1}], got {m}")
    if not p > 2:
        raise ValueError("p must exceed 2")
    ratio = (p - 2.0) / (3.0 * (2.0 * p - 1.0))
    return (1.0 / 6.0) * ratio ** (depth - m - 1)


def rate_bound(hidden_widths, out_width: int, depth: int, p, scale: float) -> float:
    """Aggregate width-decay form: scale * n_L^(1/3) * sum_m n_m^(-exponent)."""
    hidden_widths = [int(w) for w in hidden_widths]
    if len(hidden_widths) != depth - 1:
        raise ValueError(f"expected {depth - 1} hidden widths, got {len(hidden_widths)}")
    if any(w < 1 for w in hidden_widths) or out_width < 1:
        raise ValueError("widths must be positive")
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    total = sum(
        w ** (-rate_exponent(depth, m, p)) for m, w in enumerate(hidden_widths, start=1)
    )
    return scale * out_width ** (1.0 / 3.0) * total


@dataclass(frozen=True)
class BoundReport:
    """Full record of a bound-chain evaluation.

    ``w1_bound`` is the final Wasserstein bound; ``certified`` is True only
    in certificate mode with every validity flag passing.  ``levels`` holds
    one record per layer transition with every intermediate value.
    """

    mode: str
    p: int
    widths: tuple[int, ...]
    s: int
    w1_bound: float
    smooth3_final: float
    certified: bool
    smoothing_ok: bool
    power_reduction_ok: bool
    rate_exponents: tuple[float, ...]
    levels: tuple[dict, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "mode": self.mode,
            "p": self.p,
            "widths": list(self.widths),
            "s": self.s,
            "w1_bound": self.w1_bound,
            "smooth3_final": self.smooth3_final,
            "certified": self.certified,
            "flags": {
                "smoothing_ok": self.smoothing_ok,
                "power_reduction_ok": self.power_reduction_ok,
            },
            "rate_exponents": list(self.rate_exponents),
            "levels": [dict(level) for level in self.levels],
        }


def _certificate_level_inputs(ledger: MomentLedger, src: int):
    p = ledger.p
    b_big = [moment_bound(src, x, ledger) for x in ledger.x_l1]
    b_two = [moment_bound(src, x, ledger, order=1) for x in ledger.x_l1]
    thirds = [b ** (3.0 / (2 * p)) for b in b_big]
    roots = [b ** (1.0 / (2 * p)) for b in b_big]
    s = ledger.s
    mismatch = np.empty((s, s))
    cross = np.empty((s, s))
    for a in range(s):
        for b in range(a, s):
            mismatch[a, b] = mismatch[b, a] = pair_mismatch_constant(
                src, ledger.x_l1[a], ledger.x_l1[b], ledger
            )
            cross[a, b] = cross[b, a] = pair_cross_constant(
                src, ledger.x_l1[a], ledger.x_l1[b], ledger
            )
    return b_big, b_two, thirds, roots, mismatch, cross


def _measurement_level_inputs(config, chi, ledger, n_replicates, seed, n_nodes):
    """Measured per-layer statistics: third moments, 2p moments, product stats."""
    from .weights import sample_matrix

    p = ledger.p
    s = chi.s
    depth = config.depth
    kernels = kernel_recursion(config, chi, n_nodes=n_nodes)
    act = config.activation
    layers = range(1, depth)
    sums = {
        ell: {
            "third": np.zeros(s),
            "m2p": np.zeros(s),
            "prod": np.zeros((s, s)),
            "prod_sq": np.zeros((s, s)),
            "prod_cross": np.zeros((s, s)),
        }
        for ell in layers
    }
    x = chi.matrix
    for r in range(n_replicates):
        current = None
        for ell in range(depth - 1):
            w = sample_matrix(
                config.weight_specs[ell],
                config.widths[ell + 1],
                config.widths[ell],
                fan_in=config.widths[ell],
                seed=seed,
                layer=ell,
                replicate=r,
            )
            current = w @ (x if ell == 0 else act(current))
            sig = act(current)
            rec = sums[ell + 1]
            v1 = sig[0]
            rec["third"] += np.abs(v1) ** 3
            rec["m2p"] += v1 ** (2 * p)
            outer1 = np.outer(v1, v1)
            rec["prod"] += outer1
            rec["prod_sq"] += outer1**2
            if sig.shape[0] > 1:
                v2 = sig[1]
                rec["prod_cross"] += outer1 * np.outer(v2, v2)
    stats = {}
    for ell in layers:
        rec = sums[ell]
        n = float(n_replicates)
        prod_mean = rec["prod"] / n
        kern = kernels[ell - 1].array
        gauss_prod = np.empty((s, s))
        gauss_m2p = np.empty(s)
        for a in range(s):
            for b in range(a, s):
                minor = np.array(
                    [[kern[a, a], kern[a, b]], [kern[a, b], kern[b, b]]]
                )
                gauss_prod[a, b] = gauss_prod[b, a] = gaussian_expectation(
                    minor, act, n_nodes=n_nodes
                )
            gauss_m2p[a] = _gaussian_power_moment(kern[a, a], act, 2 * p, n_nodes)
        stats[ell] = {
            "third": rec["third"] / n,
            "m2p": rec["m2p"] / n,
            "b_two_meas": np.maximum(np.diag(prod_mean), np.diag(gauss_prod)),
            "b_big_meas": np.maximum(rec["m2p"] / n, gauss_m2p),
            "mismatch": np.abs(gauss_prod - prod_mean),
            "variance": np.maximum(rec["prod_sq"] / n - prod_mean**2, 0.0),
            "cross": rec["prod_cross"] / n - prod_mean**2,
        }
    return stats


def _gaussian_power_moment(variance: float, act, power: int, n_nodes: int) -> float:
    """E[sigma(Z)^power] for Z ~ N(0, variance) by 1-D quadrature."""
    if variance <= 0:
        return float(act(np.array(0.0))) ** power
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    z = math.sqrt(2.0 * variance) * t
    return float((act(z) ** power) @ w) / math.sqrt(math.pi)


def bound_chain(
    config: NetworkConfig,
    chi: InputSet,
    ledger: MomentLedger | None = None,
    mode: str = "certificate",
    p: int = 3,
    mc_replicates: int = 4096,
    seed: int = 0,
    n_nodes: int = 64,
) -> BoundReport:
    """Layer-by-layer explicit W1 bound between F_L(chi) and its limit.

    Certificate mode composes the printed bound formulas exactly; when the
    smoothing or power-reduction preconditions fail at some level the
    formulas are still evaluated (monotone extension) but the report is
    marked uncertified.  Measurement mode replaces moment inputs by Monte
    Carlo estimates (mc_replicates forward passes with the given seed) and
    is never certified.
    """
    if mode not in ("certificate", "measurement"):
        raise ValueError(f"mode must be 'certificate' or 'measurement', got {mode!r}")
    if config.depth < 2:
        raise ValueError("bound chain needs depth at least 2")
    if ledger is None:
        ledger = ledger_from_config(config, chi, p)
    if ledger.depth != config.depth:
        raise LedgerError(
            f"ledger depth {ledger.depth} does not match config depth {config.depth}"
        )
    if ledger.s != chi.s:
        raise LedgerError("ledger input norms do not match the input set")

    p = ledger.p
    s = chi.s
    depth = config.depth
    widths = config.widths
    out_width = config.out_width

    measured = None
    if mode == "measurement":
        measured = _measurement_level_inputs(
            config, chi, ledger, mc_replicates, seed, n_nodes
        )

    w1_one = np.zeros((s, s))
    w1_two = np.zeros((s, s))
    levels: list[dict] = []
    smoothing_ok = True
    power_ok = True

    for target in range(2, depth + 1):
        src = target - 1
        fan_in = widths[src]
        c2 = ledger.c2[src]
        if src == depth - 1:
            c3 = ledger.c3_last
        else:
            c3 = ledger.c2p[src] ** (3.0 / (2 * p))

        if mode == "certificate":
            b_big, b_two, thirds, roots, mism_c, cross_c = _certificate_level_inputs(
                ledger, src
            )
        else:
            stats = measured[src]
            thirds = list(stats["third"])
            roots = [b ** (1.0 / (2 * p)) for b in stats["b_big_meas"]]

        def pair_payload(a: int, b: int):
            if mode == "certificate":
                return CertificatePair(
                    mismatch_const=float(mism_c[a, b]),
                    cross_const=float(cross_c[a, b]),
                    b2_geomean=math.sqrt(b_two[a] * b_two[b]),
                    w1_one=float(w1_one[a, b]),
                    w1_two=float(w1_two[a, b]),
                )
            return MeasuredPair(
                mismatch=float(stats["mismatch"][a, b]),
                variance=float(stats["variance"][a, b]),
                cross_covariance=float(stats["cross"][a, b]),
            )

        if target < depth:
            new_one = np.zeros((s, s))
            new_two = np.zeros((s, s))
            entries = []
            for a in range(s):
                for b in range(a, s):
                    payloads = [
                        pair_payload(u, v) for u in (a, b) for v in (a, b)
                    ]
                    third_sum = thirds[a] + thirds[b]
                    root_sum_sq = (roots[a] + roots[b]) ** 2
                    for d, store in ((1, new_one), (2, new_two)):
                        gen = float(gaussianization_term(d, fan_in, c2, c3, third_sum))
                        # measurement mode measures this inside the mixture term
                        var = (
                            c2 * d / 2.0 * float(root_sum_sq) / math.sqrt(fan_in)
                            if mode == "certificate"
                            else 0.0
                        )
                        mix = float(mixture_to_limit_term(d, fan_in, c2, payloads, mode, p=p))
                        smooth3 = gen + var + mix
                        dim = 2 * d
                        ok = smooth3 <= 2.0 * math.sqrt(dim) * (1.0 + _FLAG_SLACK)
                        smoothing_ok &= ok
                        w1_val = _smooth_value(smooth3, dim)
                        store[a, b] = store[b, a] = w1_val
                        entries.append(
                            {
                                "a": a,
                                "b": b,
                                "d": d,
                                "gaussianization": gen,
                                "variance": var,
                                "mixture": mix,
                                "smooth3": smooth3,
                                "smoothing_ok": bool(ok),
                                "w1": w1_val,
                            }
                        )
            level_power_ok = bool(
                (new_one <= 1.0 + _FLAG_SLACK).all()
                and (new_two <= 1.0 + _FLAG_SLACK).all()
            )
            power_ok &= level_power_ok
            levels.append(
                {
                    "layer": target,
                    "kind": "pair",
                    "fan_in": fan_in,
                    "entries": entries,
                    "power_reduction_ok": level_power_ok,
                }
            )
            w1_one, w1_two = new_one, new_two
        else:
            payloads = [pair_payload(a, b) for a in range(s) for b in range(s)]
            third_sum = float(np.sum(thirds))
            root_sum_sq = float(np.sum(roots)) ** 2
            gen = float(gaussianization_term(out_width, fan_in, c2, c3, third_sum))
            var = (
                c2 * out_width / 2.0 * root_sum_sq / math.sqrt(fan_in)
                if mode == "certificate"
                else 0.0
            )
            mix = float(mixture_to_limit_term(out_width, fan_in, c2, payloads, mode, p=p))
            smooth3_final = gen + var + mix
            dim = out_width * s
            ok = smooth3_final <= 2.0 * math.sqrt(dim) * (1.0 + _FLAG_SLACK)
            smoothing_ok &= ok
            w1_final = _smooth_value(smooth3_final, dim)
            levels.append(
                {
                    "layer": target,
                    "kind": "final",
                    "fan_in": fan_in,
                    "entries": [
                        {
                            "d": out_width,
                            "gaussianization": gen,
                            "variance": var,
                            "mixture": mix,
                            "smooth3": smooth3_final,
                            "smoothing_ok": bool(ok),
                            "w1": w1_final,
                        }
                    ],
                    "power_reduction_ok": True,
                }
            )

    certified = bool(mode == "certificate" and smoothing_ok and power_ok)
    exponents = tuple(rate_exponent(depth, m, p) for m in range(1, depth))
    return BoundReport(
        mode=mode,
        p=p,
        widths=widths,
        s=s,
        w1_bound=w1_final,
        smooth3_final=smooth3_final,
        certified=certified,
        smoothing_ok=bool(smoothing_ok),
        power_reduction_ok=bool(power_ok),
        rate_exponents=exponents,
        levels=tuple(levels),
    )
