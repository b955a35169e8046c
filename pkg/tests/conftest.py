"""Shared fixtures and seeded random generators for the test suite."""

import random
from fractions import Fraction

import pytest

from realstab.matrix import StateSpace, TransferMatrix
from realstab.poly import Polynomial
from realstab.ratfun import RationalFunction

HALF = Fraction(1, 2)
Z = Polynomial.z()


def rational(rng, lo=-3, hi=3, dens=(1, 2, 3)):
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def random_poly(rng, degree, lead_nonzero=True):
    coeffs = [rational(rng) for _ in range(degree + 1)]
    if lead_nonzero and coeffs[-1] == 0:
        coeffs[-1] = Fraction(1)
    return Polynomial(coeffs)


def random_proper(rng, max_deg=2):
    dden = rng.randint(0, max_deg)
    den = random_poly(rng, dden)
    num = Polynomial([rational(rng) for _ in range(rng.randint(0, dden) + 1)])
    return RationalFunction(num, den)


def random_strictly_proper(rng, max_deg=2):
    dden = rng.randint(1, max_deg)
    den = random_poly(rng, dden)
    num = Polynomial([rational(rng) for _ in range(dden)])
    return RationalFunction(num, den)


def random_proper_tm(rng, rows, cols, max_deg=2):
    return TransferMatrix(rows, cols,
                          [random_proper(rng, max_deg) for _ in range(rows * cols)])


def random_strictly_proper_tm(rng, rows, cols, shared_den=True):
    """Strictly proper matrix; a shared denominator mirrors real response maps."""
    if not shared_den:
        return TransferMatrix(rows, cols,
                              [random_strictly_proper(rng) for _ in range(rows * cols)])
    den = random_poly(rng, 2)
    entries = [RationalFunction(Polynomial([rational(rng), rational(rng)]), den)
               for _ in range(rows * cols)]
    return TransferMatrix(rows, cols, entries)


def random_fm(rng, rows, cols, lo=-2, hi=2):
    return [[rational(rng, lo, hi) for _ in range(cols)] for _ in range(rows)]


def random_stable_fir(rng, order, scale=Fraction(1, 3)):
    taps = [rational(rng, -2, 2, (2, 3, 4)) * scale for _ in range(order + 1)]
    if order == 0:
        return RationalFunction(taps[0])
    return RationalFunction(Polynomial(list(reversed(taps))),
                            Polynomial([0] * order + [1]))


def random_stable_fir_tm(rng, rows, cols, order=1, scale=Fraction(1, 3)):
    return TransferMatrix(rows, cols,
                          [random_stable_fir(rng, order, scale) for _ in range(rows * cols)])


def rf(num, den=1):
    return RationalFunction(num, den)


def tm(rows_of_entries):
    return TransferMatrix.from_rows([[rf(e) if not isinstance(e, RationalFunction) else e
                                      for e in row] for row in rows_of_entries])


@pytest.fixture
def rng():
    return random.Random(0)


@pytest.fixture
def scalar_plant():
    return TransferMatrix(1, 1, [rf(1, Z)])


@pytest.fixture
def scalar_controller():
    return TransferMatrix(1, 1, [rf(HALF)])


@pytest.fixture
def deadbeat_ss():
    return StateSpace([[HALF]], [[1]], [[1]], [[0]])
