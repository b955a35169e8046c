"""Uncertainty sets, Monte-Carlo certification, and tightness probes.

The implemented uncertainty family is the ball of block-structured FIR
perturbations: each masked block gets entries with finitely many impulse
response taps, so every sample stays inside exact rational arithmetic.
Samples are deterministic functions of the seed, sample i of a run is
drawn from seed + i, and sample 0 is always the zero perturbation (the
certified conditions quantify over sets containing zero).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .analysis import (
    MARGINAL,
    STABLE,
    UNSTABLE,
    StabilityVerdict,
    hinf_peak,
    roots_of,
    stability_verdict,
)
from .errors import (
    DimensionMismatch,
    EmptyMask,
    InfiniteMargin,
    NotStable,
    SingularMatrix,
    SingularPerturbedLoop,
    SoundnessViolation,
)
from .iop import IopQuadruple, iop_margin, iop_robust_check
from .matrix import TransferMatrix
from .poly import Polynomial
from .ratfun import RationalFunction
from .realization import RealizationSystem, perturbed_stability, stability_matrix
from .sls import SlsOutputFeedback, sls_of_margin, sls_of_robust_check

CHECKERS = ("lemma2-direct", "cor3", "cor7", "cor9")

_COEFF_GRID = 1 << 24  # dyadic quantization keeps exact arithmetic fast
_SCALE_GRID = 1 << 40


@dataclass(frozen=True)
class UncertaintySpec:
    """Structured FIR norm ball: which blocks, how big, how long, which seed."""

    block_mask: frozenset
    radius: float
    sample_order: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "block_mask",
                           frozenset((str(a), str(b)) for a, b in self.block_mask))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.sample_order < 0:
            raise ValueError("sample order must be nonnegative")


@dataclass(frozen=True)
class SampleStats:
    n_samples: int
    n_stable: int
    n_marginal: int
    n_unstable: int
    worst_sample_norm: float

    def __post_init__(self):
        if self.n_samples != self.n_stable + self.n_marginal + self.n_unstable:
            raise ValueError("sample counts do not add up")


@dataclass(frozen=True)
class Certificate:
    """Outcome record of a stability analysis or certification run."""

    kind: str  # small-gain-IOP | small-gain-SLS-OF | pointwise | monte-carlo
    margin: float | None
    verdict: StabilityVerdict
    condition_ref: str
    sample_stats: SampleStats | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind == "monte-carlo" and self.sample_stats is None:
            raise ValueError("monte-carlo certificates need sample statistics")


def _partition_of(shape):
    if isinstance(shape, RealizationSystem):
        return shape.partition, shape.partition
    if isinstance(shape, TransferMatrix):
        if shape.row_blocks is None or shape.col_blocks is None:
            raise DimensionMismatch("host matrix carries no partition")
        return shape.row_blocks, shape.col_blocks
    row_blocks, col_blocks = shape
    return tuple(row_blocks), tuple(col_blocks)


def _quantize(x: float, grid: int) -> Fraction:
    return Fraction(round(x * grid), grid)


def _fir_entry(rng, order: int) -> RationalFunction:
    taps = [_quantize(c, _COEFF_GRID) for c in rng.uniform(-1.0, 1.0, order + 1)]
    if order == 0:
        return RationalFunction(taps[0])
    num = Polynomial(list(reversed(taps)))
    den = Polynomial([0] * order + [1])
    return RationalFunction(num, den)


def _grid_norm(Xm: TransferMatrix) -> float:
    return hinf_peak(Xm)[0]


def _sample_with_norm(spec: UncertaintySpec, shape) -> tuple[TransferMatrix, float]:
    row_blocks, col_blocks = _partition_of(shape)
    row_labels = {label for label, _ in row_blocks}
    col_labels = {label for label, _ in col_blocks}
    if not spec.block_mask:
        raise EmptyMask("uncertainty mask selects no blocks")
    for a, b in spec.block_mask:
        if a not in row_labels or b not in col_labels:
            raise DimensionMismatch(f"mask block ({a}, {b}) not in the partition")
    rows = sum(s for _, s in row_blocks)
    cols = sum(s for _, s in col_blocks)
    rng = np.random.default_rng(spec.seed)
    zero = RationalFunction(0)
    entries = [zero] * (rows * cols)
    r0 = 0
    for ra, rsize in row_blocks:
        c0 = 0
        for cb, csize in col_blocks:
            if (ra, cb) in spec.block_mask:
                for i in range(rsize):
                    for j in range(csize):
                        entries[(r0 + i) * cols + (c0 + j)] = _fir_entry(rng, spec.sample_order)
            c0 += csize
        r0 += rsize
    raw = TransferMatrix(rows, cols, entries, row_blocks, col_blocks)
    fill = rng.uniform(0.0, 1.0)
    if raw.is_zero():
        return raw, 0.0
    base = _grid_norm(raw)
    scale = Fraction(fill * spec.radius / base).limit_denominator(_SCALE_GRID)
    scaled = raw.scale(RationalFunction(scale))
    return scaled.with_blocks(row_blocks, col_blocks), float(scale) * base


def sample_delta(spec: UncertaintySpec, shape) -> TransferMatrix:
    """Draw one structured FIR perturbation with peak gain below spec.radius.

    Taps are uniform on [-1, 1] (dyadically quantized so they stay exact),
    then the whole matrix is rescaled to a peak gain of u * radius with u
    uniform on (0, 1). Deterministic given (spec, shape).
    """
    return _sample_with_norm(spec, shape)[0]


# -- Monte-Carlo certification ----------------------------------------------


def _checker_context(nominal, checker: str):
    """Returns (shape, margin, payload) for the per-sample evaluator."""
    if checker == "lemma2-direct":
        if not isinstance(nominal, RealizationSystem):
            raise TypeError("lemma2-direct expects a RealizationSystem")
        return ((nominal.partition, nominal.partition), None,
                ("lemma2", stability_matrix(nominal)))
    if checker in ("cor3", "cor9"):
        if not isinstance(nominal, IopQuadruple):
            raise TypeError(f"{checker} expects an IopQuadruple")
        p, m = nominal.G.shape
        shape = ((("y", p),), (("u", m),))
        return shape, iop_margin(nominal), ("iop", nominal.U)
    if checker == "cor7":
        if not isinstance(nominal, SlsOutputFeedback):
            raise TypeError("cor7 expects an SlsOutputFeedback")
        ss = nominal.ss
        shape = ((("x", ss.n), ("y", ss.p)), (("x", ss.n), ("u", ss.m)))
        return shape, sls_of_margin(nominal), ("slsof", nominal)
    raise ValueError(f"unknown checker {checker!r}; expected one of {CHECKERS}")


def _evaluate_sample(payload, delta: TransferMatrix) -> StabilityVerdict:
    kind, obj = payload
    try:
        if kind == "lemma2":
            return stability_verdict(perturbed_stability(obj, delta))
        if kind == "iop":
            return iop_robust_check(obj, delta)
        if kind == "slsof":
            maps: SlsOutputFeedback = obj
            ss = maps.ss
            dA = delta.block("x", "x")
            dB = delta.block("x", "u")
            dC = delta.block("y", "x")
            dD = delta.block("y", "u")
            return sls_of_robust_check(ss, maps, dA, dB, dC, dD)[1]
        raise ValueError(kind)
    except (SingularPerturbedLoop, SingularMatrix):
        return StabilityVerdict(UNSTABLE, ((complex(float("inf"), 0.0), float("inf")),))


def _run_sample(args) -> tuple[int, str, tuple, float]:
    payload, spec, shape, index = args
    if index == 0:
        rows = sum(s for _, s in shape[0])
        cols = sum(s for _, s in shape[1])
        delta = TransferMatrix.zeros(rows, cols, shape[0], shape[1])
        norm = 0.0
    else:
        delta, norm = _sample_with_norm(replace(spec, seed=spec.seed + index), shape)
    verdict = _evaluate_sample(payload, delta)
    return index, verdict.status, verdict.witnesses, norm


def default_jobs() -> int:
    """Worker count for sample evaluation, capped by REALSTAB_THREADS."""
    raw = os.environ.get("REALSTAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def monte_carlo_certify(nominal, spec: UncertaintySpec, n: int, checker: str,
                        n_jobs: int | None = None) -> Certificate:
    """Empirically check a robustness condition over n sampled perturbations.

    nominal is a RealizationSystem (lemma2-direct), an IopQuadruple (cor3,
    cor9), or an SlsOutputFeedback (cor7). Sample i is drawn from
    seed + i; sample 0 is the zero perturbation. Per-sample singularities
    are recorded as unstable, not raised. When the checker has an analytic
    margin, any non-stable sample strictly below it raises
    SoundnessViolation, which would indicate a bug in this package.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    shape, margin, payload = _checker_context(nominal, checker)
    jobs = default_jobs() if n_jobs is None else max(1, n_jobs)
    tasks = [(payload, spec, shape, i) for i in range(n)]
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_sample, tasks, chunksize=max(1, n // (jobs * 4))))
    else:
        results = [_run_sample(t) for t in tasks]

    counts = {STABLE: 0, MARGINAL: 0, UNSTABLE: 0}
    worst: dict[str, tuple[float, int, tuple]] = {}
    max_norm = 0.0
    for index, status, witnesses, norm in results:
        bucket = status if status in counts else UNSTABLE
        counts[bucket] += 1
        max_norm = max(max_norm, norm)
        if bucket != STABLE:
            if margin is not None and norm < margin:
                raise SoundnessViolation(
                    f"sample {index} with norm {norm} below margin {margin} was {status}")
            prev = worst.get(bucket)
            if prev is None or (norm, index) < prev[:2]:
                worst[bucket] = (norm, index, witnesses)

    if not worst:
        verdict = StabilityVerdict(STABLE)
        worst_norm = max_norm
    else:
        status = UNSTABLE if counts[UNSTABLE] else MARGINAL
        worst_norm, _, witnesses = worst[status]
        verdict = StabilityVerdict(status, witnesses)
    stats = SampleStats(n_samples=n, n_stable=counts[STABLE],
                        n_marginal=counts[MARGINAL], n_unstable=counts[UNSTABLE],
                        worst_sample_norm=worst_norm)
    return Certificate(kind="monte-carlo", margin=margin, verdict=verdict,
                       condition_ref=checker, sample_stats=stats, seed=spec.seed)


# -- worst-case probe at the gain peak ---------------------------------------


@dataclass(frozen=True)
class TightnessProbe:
    """Constant perturbation aligned with the gain peak, plus what it proved."""

    delta: TransferMatrix
    peak_gain: float
    peak_omega: float
    witness_root: complex | None
    boundary_distance: float | None
    conclusive: bool
    note: str


def worst_case_delta(U_hat: TransferMatrix, epsilon: float) -> TightnessProbe:
    """Constant perturbation of norm epsilon aligned with the peak of U_hat.

    When the peak sits at omega = 0 or pi the singular vectors are real and
    the probe drives det(I - Delta U_hat) to a root on the unit circle
    (checked and reported); an interior peak has intrinsically complex
    alignment, so the real projection is returned with an inconclusive
    note.
    """
    v = stability_verdict(U_hat)
    if not v.is_stable:
        raise NotStable(f"operand is {v.status}")
    if U_hat.is_zero():
        raise InfiniteMargin("zero map has an infinite margin; nothing to probe")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InfiniteMargin("probe needs a finite positive margin")
    peak, omega = hinf_peak(U_hat)
    real_peak = omega < 1e-6 or math.pi - omega < 1e-6
    z0 = 1.0 if omega < math.pi / 2 else -1.0
    point = complex(z0, 0.0) if real_peak else complex(math.cos(omega), math.sin(omega))
    value = U_hat.evaluate(point)
    u_mat, _, vh_mat = np.linalg.svd(value)
    align = np.outer(np.conj(vh_mat[0, :]), np.conj(u_mat[:, 0]))
    if not real_peak:
        real_part = align.real
        norm = np.linalg.norm(real_part, 2)
        align = real_part / norm if norm > 0 else real_part
    else:
        align = align.real
    delta = TransferMatrix.constant(
        [[_quantize_exact(epsilon * align[i, j]) for j in range(align.shape[1])]
         for i in range(align.shape[0])])
    loop = TransferMatrix.identity(delta.rows) - delta * U_hat
    det_fn = loop.determinant()
    witness = None
    distance = None
    if det_fn.is_zero:
        # Singular at every z, the strongest destabilization a probe can find.
        distance = 0.0
    else:
        roots = roots_of(det_fn)
        if roots:
            witness = min(roots, key=lambda r: abs(abs(r) - 1.0))
            distance = abs(abs(witness) - 1.0)
    if real_peak and distance is not None and distance <= 1e-6:
        note = "boundary root found: margin is tight at a real-frequency peak"
        conclusive = True
    elif real_peak:
        note = "real-frequency peak but no boundary root within 1e-6"
        conclusive = False
    else:
        note = "complex-peak: tightness probe inconclusive"
        conclusive = False
    return TightnessProbe(delta=delta, peak_gain=peak, peak_omega=omega,
                          witness_root=witness, boundary_distance=distance,
                          conclusive=conclusive, note=note)


def _quantize_exact(x: float) -> Fraction:
    return Fraction(float(x))
