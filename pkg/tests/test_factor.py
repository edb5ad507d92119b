import random
from fractions import Fraction

import pytest

from twodof.factor import (
    RightMFD,
    column_reduce,
    is_left_coprime,
    is_right_coprime,
    left_coprime_mfd,
    right_coprime_mfd,
    stable_mfd,
    zeros_and_poles,
)
from twodof.polyalg import ONE, S, ZERO, Poly, PolyMat, RatFn, RatMat, polymat_det
from twodof.stability import matrix_is_rh_inf


def rf(num, den=ONE):
    return RatFn(num, den)


def random_proper_plant(rng, rows, cols, max_den=3):
    entries = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            dd = rng.randint(1, max_den)
            den = ONE
            for _ in range(dd):
                den = den * Poly((Fraction(rng.randint(-3, 3)), Fraction(1)))
            nd = rng.randint(0, dd)
            num = Poly(tuple(Fraction(rng.randint(-4, 4)) for _ in range(nd + 1)))
            row.append(RatFn(num, den))
        entries.append(row)
    return RatMat(entries)


def test_right_mfd_example_plant():
    plant = RatMat([[rf((S - ONE) * (S + 2 * ONE), (S - 2 * ONE) ** 2)]])
    mfd = right_coprime_mfd(plant)
    assert mfd.n.entry(0, 0) == (S - ONE) * (S + 2 * ONE)
    assert mfd.d.entry(0, 0) == (S - 2 * ONE) ** 2
    assert is_right_coprime(mfd.n, mfd.d)
    assert mfd.plant() == plant


def test_right_mfd_cancels_common_factors():
    # entries share hidden factors; the division by the GCRD must remove them
    plant = RatMat([[rf(S + ONE, (S + ONE) * (S + 2 * ONE))]])
    mfd = right_coprime_mfd(plant)
    assert mfd.n.entry(0, 0) == ONE
    assert mfd.d.entry(0, 0) == S + 2 * ONE


def test_mfd_reconstruction_random():
    rng = random.Random(41)
    shapes = [(1, 1), (2, 2), (2, 3), (3, 2)]
    for trial in range(60):
        rows, cols = shapes[trial % len(shapes)]
        plant = random_proper_plant(rng, rows, cols)
        mfd = right_coprime_mfd(plant)
        assert mfd.plant() == plant
        assert is_right_coprime(mfd.n, mfd.d)
        left = left_coprime_mfd(plant)
        assert left.plant() == plant
        assert is_left_coprime(left.dl, left.nl)
        # the two fractions describe the same object: dl@n == nl@d
        assert left.dl @ mfd.n == left.nl @ mfd.d


def test_column_reduce_repairs_degree_inflation():
    # D with dependent highest-degree column coefficients
    d = PolyMat([[S ** 2, S ** 2 + ONE], [ZERO, ONE]])
    n = PolyMat([[ONE, ZERO], [ZERO, ONE]])
    n2, d2 = column_reduce(n, d)
    det = polymat_det(d2)
    assert det.monic() == polymat_det(d).monic()  # unimodular column ops
    # column degrees now add up to deg det
    assert sum(deg or 0 for deg in d2.column_degrees()) == det.degree()
    # same fraction
    assert n.to_ratmat() @ d.to_ratmat().inv() == n2.to_ratmat() @ d2.to_ratmat().inv()


def test_stable_mfd_example_plant():
    plant = RatMat([[rf((S - ONE) * (S + 2 * ONE), (S - 2 * ONE) ** 2)]])
    smfd = stable_mfd(right_coprime_mfd(plant), shift=2)
    assert smfd.nprime.entry(0, 0) == rf(S - ONE, S + 2 * ONE)
    assert smfd.dprime.entry(0, 0) == rf((S - 2 * ONE) ** 2, (S + 2 * ONE) ** 2)
    assert smfd.plant() == plant
    # witness identity and memberships
    assert smfd.u @ smfd.nprime + smfd.v @ smfd.dprime == RatMat.identity(1)
    for mat in (smfd.nprime, smfd.dprime, smfd.u, smfd.v):
        assert matrix_is_rh_inf(mat)


def test_stable_mfd_random_sweep():
    rng = random.Random(43)
    for trial in range(25):
        rows, cols = [(1, 1), (2, 2)][trial % 2]
        plant = random_proper_plant(rng, rows, cols, max_den=2)
        smfd = stable_mfd(right_coprime_mfd(plant), shift=1)
        assert smfd.plant() == plant
        ident = smfd.u @ smfd.nprime + smfd.v @ smfd.dprime
        assert ident == RatMat.identity(cols)
        for mat in (smfd.nprime, smfd.dprime, smfd.u, smfd.v):
            assert matrix_is_rh_inf(mat)


def test_stable_mfd_rejects_bad_input():
    with pytest.raises(ValueError):
        stable_mfd(right_coprime_mfd(RatMat([[rf(ONE, S + ONE)]])), shift=0)
    common = S + ONE
    bogus = RightMFD(
        n=PolyMat([[common * (S - ONE)]]), d=PolyMat([[common * (S + 2 * ONE)]])
    )
    with pytest.raises(ValueError):
        stable_mfd(bogus)


def test_zeros_and_poles_example():
    plant = RatMat([[rf((S - ONE) * (S + 2 * ONE), (S - 2 * ONE) ** 2)]])
    report = zeros_and_poles(right_coprime_mfd(plant))
    assert report.zero_polynomial == (S - ONE) * (S + 2 * ONE)
    assert report.pole_polynomial == (S - 2 * ONE) ** 2
    locs = {z.location for z in report.zeros}
    assert locs == {Fraction(1), Fraction(-2)}
    unstable = report.unstable_zeros()
    assert len(unstable) == 1 and unstable[0].location == Fraction(1)
    poles = report.unstable_poles()
    assert len(poles) == 1 and poles[0].location == Fraction(2)
    assert poles[0].multiplicity == 2


def test_zero_directions_annihilate_numerator():
    # 2x2 plant with a transmission zero at s = 1 in the (1,1) channel only
    plant = RatMat(
        [
            [rf(S - ONE, S + ONE), rf(ZERO)],
            [rf(ZERO), rf(ONE, S + 2 * ONE)],
        ]
    )
    mfd = right_coprime_mfd(plant)
    report = zeros_and_poles(mfd)
    z = [zero for zero in report.zeros if zero.location == Fraction(1)]
    assert len(z) == 1
    direction = z[0].direction
    assert direction is not None
    vals = mfd.n.to_ratmat().eval_at(Fraction(1))
    combo = [
        sum(direction[i] * vals[i][j] for i in range(2)) for j in range(2)
    ]
    assert all(c == 0 for c in combo)


def test_scalar_pole_zero_disjoint_for_coprime_fractions():
    # a transmission zero can coincide with a pole in another channel of a
    # MIMO plant, but for scalar coprime fractions the two sets are disjoint
    rng = random.Random(47)
    from twodof.polyalg import poly_gcd

    for _ in range(30):
        plant = random_proper_plant(rng, 1, 1, max_den=3)
        if plant.entry(0, 0).num.is_zero():
            continue
        report = zeros_and_poles(right_coprime_mfd(plant))
        g = poly_gcd(report.zero_polynomial, report.pole_polynomial)
        assert g == ONE
