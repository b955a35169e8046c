"""Closed-loop realizations and their internal stability matrices.

A realization matrix R collects the linear maps among all internal signals
of a closed loop, eta = R eta + d. The internal stability matrix S maps the
external disturbance to the internal state, eta = S d, and when both exist
they satisfy (I - R) S = S (I - R) = I. Additive perturbations of R induce
a feedback path around S: S(Delta) = S (I - Delta S)^-1 = (I - S Delta)^-1 S.

Properness of R is a block-level notion: blocks coupling distinct signals
must be proper, while diagonal blocks may be improper (state dynamics
contribute zI - A terms on the diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    DimensionMismatch,
    IdentityCheckFailed,
    ImproperBlock,
    MaskViolation,
    NoStabilityMatrix,
    NotStrictlyProper,
    SingularMatrix,
    SingularPerturbedLoop,
)
from .matrix import StateSpace, TransferMatrix, block_matrix
from .poly import Polynomial
from .ratfun import RationalFunction


def _offdiagonal_improper_blocks(R: TransferMatrix) -> list[tuple[str, str]]:
    bad = []
    for ra, _ in R.row_blocks:
        for cb, _ in R.col_blocks:
            if ra == cb:
                continue
            if not R.block(ra, cb).is_proper():
                bad.append((ra, cb))
    return bad


@dataclass(frozen=True)
class RealizationSystem:
    """A square, block-partitioned realization matrix with named signals."""

    R: TransferMatrix

    def __post_init__(self):
        R = self.R
        if not R.is_square:
            raise DimensionMismatch("realization matrix must be square")
        if R.row_blocks is None or R.col_blocks is None:
            raise DimensionMismatch("realization matrix needs a signal partition")
        if R.row_blocks != R.col_blocks:
            raise DimensionMismatch("row and column partitions must agree")
        bad = _offdiagonal_improper_blocks(R)
        if bad:
            raise ImproperBlock(f"improper off-diagonal blocks: {bad}")

    @property
    def signals(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.R.row_blocks)

    @property
    def partition(self):
        return self.R.row_blocks

    def loop_matrix(self) -> TransferMatrix:
        """I - R, the matrix whose inverse is the stability matrix."""
        eye = TransferMatrix.identity(self.R.rows, self.R.row_blocks, self.R.col_blocks)
        return eye - self.R


@dataclass(frozen=True)
class Transformation:
    """An invertible change of basis for the external disturbance."""

    T: TransferMatrix

    def __post_init__(self):
        if not self.T.is_square:
            raise DimensionMismatch("transformation must be square")
        if self.T.determinant().is_zero:
            raise SingularMatrix("transformation is singular")


@dataclass(frozen=True)
class AdditivePerturbation:
    """Structured additive perturbation of a realization matrix.

    block_mask lists the (row signal, col signal) blocks allowed to be
    nonzero; everything outside the mask must be identically zero.
    """

    delta: TransferMatrix
    block_mask: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        d = self.delta
        if d.row_blocks is None or d.col_blocks is None:
            raise DimensionMismatch("perturbation needs the host signal partition")
        object.__setattr__(self, "block_mask",
                           frozenset((str(a), str(b)) for a, b in self.block_mask))
        for ra, _ in d.row_blocks:
            for cb, _ in d.col_blocks:
                if (ra, cb) in self.block_mask:
                    continue
                if not d.block(ra, cb).is_zero():
                    raise MaskViolation(f"nonzero entries in unmasked block ({ra}, {cb})")


def _delta_matrix(delta) -> TransferMatrix:
    if isinstance(delta, AdditivePerturbation):
        return delta.delta
    if isinstance(delta, TransferMatrix):
        return delta
    raise TypeError("expected an AdditivePerturbation or TransferMatrix")


# -- builders for the four supported loop families --------------------------


def build_plant_controller(G: TransferMatrix, K: TransferMatrix) -> RealizationSystem:
    """Two-signal loop y = G u + d_y, u = K y + d_u, so R = [[0, G], [K, 0]]."""
    if G.rows != K.cols or G.cols != K.rows:
        raise DimensionMismatch(
            f"plant {G.shape} and controller {K.shape} do not close a loop")
    if not G.is_proper():
        raise ImproperBlock("plant is improper")
    if not K.is_proper():
        raise ImproperBlock("controller is improper")
    p, m = G.shape
    blocks = (("y", p), ("u", m))
    R = block_matrix(
        [[TransferMatrix.zeros(p, p), G],
         [K, TransferMatrix.zeros(m, m)]],
        blocks, blocks)
    return RealizationSystem(R)


def build_state_feedback(ss: StateSpace, K: TransferMatrix) -> RealizationSystem:
    """State-feedback loop with I - R = [[zI-A, -B], [-K, I]] over signals (x, u)."""
    n, m = ss.n, ss.m
    if K.shape != (m, n):
        raise DimensionMismatch(f"gain map must be {m}x{n}, got {K.shape}")
    blocks = (("x", n), ("u", m))
    eye_nm = TransferMatrix.identity(n + m)
    i_minus_r = block_matrix(
        [[ss.z_minus_a(), -TransferMatrix.constant(ss.B)],
         [-K, TransferMatrix.identity(m)]],
        blocks, blocks)
    return RealizationSystem((eye_nm.with_blocks(blocks, blocks) - i_minus_r))


def build_sf_sls(ss: StateSpace, phi_x: TransferMatrix,
                 phi_u: TransferMatrix) -> RealizationSystem:
    """Controller realization driven by the estimated disturbance.

    I - R = [[zI-A, -B, O], [O, I, -z*phi_u], [-I, O, z*phi_x]] over
    signals (x, u, delta); both response maps must be strictly proper so
    that the z-shifted blocks stay proper.
    """
    n, m = ss.n, ss.m
    if phi_x.shape != (n, n) or phi_u.shape != (m, n):
        raise DimensionMismatch(
            f"response maps must be {n}x{n} and {m}x{n}, got {phi_x.shape}, {phi_u.shape}")
    z = RationalFunction(Polynomial.z())
    z_phi_x = phi_x * z
    z_phi_u = phi_u * z
    if not (z_phi_x.is_proper() and z_phi_u.is_proper()):
        raise NotStrictlyProper("response maps must be strictly proper")
    blocks = (("x", n), ("u", m), ("delta", n))
    i_minus_r = block_matrix(
        [[ss.z_minus_a(), -TransferMatrix.constant(ss.B), TransferMatrix.zeros(n, n)],
         [TransferMatrix.zeros(m, n), TransferMatrix.identity(m), -z_phi_u],
         [-TransferMatrix.identity(n), TransferMatrix.zeros(n, m), z_phi_x]],
        blocks, blocks)
    eye = TransferMatrix.identity(2 * n + m, blocks, blocks)
    return RealizationSystem(eye - i_minus_r)


def build_output_feedback(ss: StateSpace, K: TransferMatrix) -> RealizationSystem:
    """Output-feedback loop, I - R = [[zI-A, -B, O], [O, I, -K], [-C, -D, I]]."""
    n, m, p = ss.n, ss.m, ss.p
    if K.shape != (m, p):
        raise DimensionMismatch(f"controller must be {m}x{p}, got {K.shape}")
    blocks = (("x", n), ("u", m), ("y", p))
    i_minus_r = block_matrix(
        [[ss.z_minus_a(), -TransferMatrix.constant(ss.B), TransferMatrix.zeros(n, p)],
         [TransferMatrix.zeros(m, n), TransferMatrix.identity(m), -K],
         [-TransferMatrix.constant(ss.C), -TransferMatrix.constant(ss.D),
          TransferMatrix.identity(p)]],
        blocks, blocks)
    eye = TransferMatrix.identity(n + m + p, blocks, blocks)
    return RealizationSystem(eye - i_minus_r)


def raw_realization(R: TransferMatrix) -> RealizationSystem:
    """Wrap a user-supplied partitioned realization matrix."""
    return RealizationSystem(R)


# -- the identity, transformations, perturbed stability ---------------------


def stability_matrix(sys: RealizationSystem) -> TransferMatrix:
    """S = (I - R)^-1; raises NoStabilityMatrix when I - R is singular."""
    try:
        return sys.loop_matrix().inverse()
    except SingularMatrix as exc:
        raise NoStabilityMatrix("I - R is singular; no stability matrix exists") from exc


def verify_rs_identity(sys: RealizationSystem, S: TransferMatrix) -> bool:
    """True iff (I - R) S and S (I - R) both equal the identity exactly."""
    loop = sys.loop_matrix()
    if loop.shape != S.shape:
        raise DimensionMismatch("stability matrix shape does not match the realization")
    eye = TransferMatrix.identity(loop.rows)
    return loop * S == eye and S * loop == eye


def apply_transformation(sys: RealizationSystem, S: TransferMatrix,
                         T: Transformation) -> tuple[RealizationSystem, TransferMatrix]:
    """Re-express the disturbance over a new basis.

    Returns the equivalent system with R_eq = I - T^-1 (I - R) and its
    stability matrix S_eq = S T; the pair satisfies the identity by
    construction, which is re-checked exactly.
    """
    Tm = T.T
    if Tm.rows != sys.R.rows:
        raise DimensionMismatch("transformation size does not match the realization")
    blocks = sys.partition
    eye = TransferMatrix.identity(sys.R.rows, blocks, blocks)
    r_eq = eye - (Tm.inverse() * sys.loop_matrix()).with_blocks(blocks, blocks)
    sys_eq = RealizationSystem(r_eq)
    s_eq = S * Tm
    if not verify_rs_identity(sys_eq, s_eq):
        raise IdentityCheckFailed("transformed pair lost the realization identity")
    return sys_eq, s_eq


def perturbed_stability(S_hat: TransferMatrix, delta,
                        nominal_realization: TransferMatrix | None = None) -> TransferMatrix:
    """Stability matrix after an additive perturbation of the realization.

    Computes both closed forms, S_hat (I - Delta S_hat)^-1 and
    (I - S_hat Delta)^-1 S_hat, checks they agree exactly, and optionally
    cross-checks against the direct inverse (I - R_hat - Delta)^-1 when the
    nominal realization matrix is supplied.
    """
    D = _delta_matrix(delta)
    if not S_hat.is_square or D.shape != S_hat.shape:
        raise DimensionMismatch(
            f"perturbation {D.shape} does not match the stability matrix {S_hat.shape}")
    eye = TransferMatrix.identity(S_hat.rows)
    try:
        right = S_hat * (eye - D * S_hat).inverse()
        left = (eye - S_hat * D).inverse() * S_hat
    except SingularMatrix as exc:
        raise SingularPerturbedLoop("I - Delta*S is singular as a rational matrix") from exc
    if right != left:
        raise IdentityCheckFailed("the two perturbed-stability closed forms disagree")
    if nominal_realization is not None:
        direct = (eye - nominal_realization - D).inverse()
        if direct != right:
            raise IdentityCheckFailed("closed form disagrees with the direct inverse")
    return right.with_blocks(S_hat.row_blocks, S_hat.col_blocks)


def check_offdiagonal_properness(sys: RealizationSystem, delta) -> bool:
    """True iff every off-diagonal signal block of R + Delta is proper."""
    D = _delta_matrix(delta)
    if D.shape != sys.R.shape:
        raise DimensionMismatch("perturbation shape does not match the realization")
    perturbed = (sys.R + D).with_blocks(sys.partition, sys.partition)
    return not _offdiagonal_improper_blocks(perturbed)
