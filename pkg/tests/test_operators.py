import math
import zlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import G_mp, c0_exact
from gradgraph.errors import DomainViolation, RegimeMismatch
from gradgraph.operators import (OperatorParams, Regime, arctan_identity_defect, as_spectrum,
                                 eval_F, eval_G, isotropic_closed_forms, isotropic_report,
                                 isotropic_root, regime_for_tau, translate_spectrum)

spectrum = st.lists(st.floats(0.01, 50.0), min_size=1, max_size=8)


def test_regime_boundaries():
    pi = math.pi
    assert regime_for_tau(0.0) is Regime.MA
    assert regime_for_tau(pi / 8) is Regime.LOG_QUOTIENT
    assert regime_for_tau(pi / 4) is Regime.INVERSE_HARMONIC
    assert regime_for_tau(3 * pi / 8) is Regime.ARCTAN_SHIFTED
    assert regime_for_tau(pi / 2) is Regime.SPECIAL_LAGRANGIAN
    with pytest.raises(DomainViolation):
        regime_for_tau(-0.1)
    with pytest.raises(DomainViolation):
        regime_for_tau(2.0)


def test_regime_parse_aliases():
    assert Regime.parse("log_quotient") is Regime.LOG_QUOTIENT
    assert Regime.parse("SpecialLagrangian") is Regime.SPECIAL_LAGRANGIAN
    with pytest.raises(ValueError):
        Regime.parse("heat")


@given(st.floats(0.01, math.pi / 2 - 0.01))
def test_from_tau_constants(tau):
    if abs(tau - math.pi / 4) < 1e-6:
        return
    p = OperatorParams.from_tau(tau, 3)
    assert p.a == pytest.approx(1 / math.tan(tau))
    assert p.b == pytest.approx(math.sqrt(abs(p.a ** 2 - 1)))


def test_constructor_validation():
    with pytest.raises(DomainViolation):
        OperatorParams.log_quotient(0.0, 3)
    with pytest.raises(DomainViolation):
        OperatorParams.arctan_shifted(1.0, 3)
    with pytest.raises(RegimeMismatch):
        OperatorParams.simple(Regime.LOG_QUOTIENT, 3)
    with pytest.raises(DomainViolation):
        OperatorParams.simple(Regime.MA, 0)
    with pytest.raises(RegimeMismatch):
        OperatorParams.simple(Regime.MA, 3).c0


def test_params_roundtrip():
    for p in (OperatorParams.log_quotient(0.7, 4, -1.2), OperatorParams.arctan_shifted(0.3, 2, 0.1),
              OperatorParams.simple("InverseHarmonic", 5, -3.0)):
        assert OperatorParams.from_dict(p.to_dict()) == p


@given(spectrum, st.floats(0.05, 5.0))
def test_eval_G_against_multiprecision(lam, b):
    n = len(lam)
    cases = [(OperatorParams.simple(Regime.MA, n), "MA", None),
             (OperatorParams.log_quotient(b, n), "LogQuotient", b),
             (OperatorParams.simple(Regime.INVERSE_HARMONIC, n), "InverseHarmonic", None),
             (OperatorParams.simple(Regime.SPECIAL_LAGRANGIAN, n), "SpecialLagrangian", None)]
    if b < 1:
        cases.append((OperatorParams.arctan_shifted(b, n), "ArcTanShifted", b))
    for p, name, bb in cases:
        ref = G_mp(name, lam, bb)
        assert abs(eval_G(p, lam) - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=200)
@given(st.floats(-3, 3), st.floats(0.05, 3), st.lists(st.floats(-3, 4), min_size=1, max_size=8))
def test_arctan_identity(a, b, logs):
    lam = -a - b + np.exp(logs)
    assert arctan_identity_defect(lam, a, b) < 1e-12


def test_arctan_identity_domain():
    with pytest.raises(DomainViolation):
        arctan_identity_defect([-5.0], 1.0, 1.0)
    with pytest.raises(DomainViolation):
        arctan_identity_defect([1.0], 1.0, 0.0)


@given(st.floats(0.05, 3), st.lists(st.floats(-3, 3), min_size=1, max_size=6))
def test_translation_log_quotient(b, logs):
    p = OperatorParams.log_quotient(b, len(logs))
    lam = p.b - p.a + np.exp(logs)
    assert abs(eval_F(p, lam) - eval_G(p, translate_spectrum(p, lam))) <= 1e-12 * max(1, abs(eval_F(p, lam)))


@given(st.floats(0.05, 0.95), st.lists(st.floats(-3, 3), min_size=1, max_size=6))
def test_translation_arctan_shifted(b, logs):
    p = OperatorParams.arctan_shifted(b, len(logs))
    lam = -p.a - p.b + np.exp(logs)
    assert abs(eval_F(p, lam) - eval_G(p, translate_spectrum(p, lam))) <= 1e-12 * max(1, abs(eval_F(p, lam)))


def test_translation_inverse_harmonic_and_identity_regimes():
    p = OperatorParams.simple(Regime.INVERSE_HARMONIC, 3)
    lam = [0.5, 2.0, 7.0]
    assert eval_F(p, lam) == pytest.approx(eval_G(p, translate_spectrum(p, lam)), rel=1e-15)
    with pytest.raises(RegimeMismatch):
        translate_spectrum(OperatorParams.simple(Regime.MA, 3), lam)


def test_domain_gates():
    with pytest.raises(DomainViolation):
        eval_G(OperatorParams.simple(Regime.MA, 2), [1.0, -1.0])
    with pytest.raises(DomainViolation):
        eval_G(OperatorParams.log_quotient(1.0, 2), [0.0, 1.0])
    with pytest.raises(DomainViolation):
        eval_G(OperatorParams.simple(Regime.INVERSE_HARMONIC, 2), [0.0, 1.0])
    with pytest.raises(DomainViolation):
        eval_G(OperatorParams.simple(Regime.MA, 3), [1.0, 1.0])


def test_as_spectrum_sorts():
    assert as_spectrum([3, 1, 2]).tolist() == [1.0, 2.0, 3.0]


@given(st.lists(st.floats(0.05, 20), min_size=1, max_size=8), st.floats(0.1, 5))
def test_c0_identity_random(a, b):
    p = OperatorParams.log_quotient(b, len(a))
    p = p.with_level(eval_G(p, a))
    assert p.c0 == pytest.approx(float(c0_exact(a, b)), rel=1e-10)
    assert p.c0 * math.prod(1 + 2 * b / x for x in a) == pytest.approx(1.0, abs=1e-10)


def _random_level(regime, n, rng):
    if regime is Regime.LOG_QUOTIENT:
        p = OperatorParams.log_quotient(rng.uniform(0.2, 3), n)
        return p.with_level(-rng.uniform(0.1, 5))
    if regime is Regime.ARCTAN_SHIFTED:
        p = OperatorParams.arctan_shifted(rng.uniform(0.1, 0.9), n)
        K = p.scale
        return p.with_level(rng.uniform(-0.7, 0.2) * n * math.pi * K)
    if regime is Regime.SPECIAL_LAGRANGIAN:
        return OperatorParams.simple(regime, n, rng.uniform(-0.45, 0.45) * n * math.pi)
    if regime is Regime.INVERSE_HARMONIC:
        return OperatorParams.simple(regime, n, rng.choice([-1, 1]) * rng.uniform(0.1, 10))
    return OperatorParams.simple(regime, n, rng.uniform(-3, 3))


@pytest.mark.parametrize("regime", list(Regime))
def test_isotropic_root_solves_equation(regime):
    rng = np.random.default_rng(zlib.crc32(regime.value.encode()))
    for _ in range(25):
        n = int(rng.integers(1, 9))
        p = _random_level(regime, n, rng)
        lam = isotropic_root(p)
        assert abs(eval_G(p, np.full(n, lam)) - p.C0) <= 1e-12 * max(1, abs(p.C0))
        closed, _ = isotropic_closed_forms(p)
        assert lam == pytest.approx(closed, rel=1e-10, abs=1e-12)


def test_inverse_harmonic_report_flags_quoted_form():
    rep = isotropic_report(OperatorParams.simple(Regime.INVERSE_HARMONIC, 4, -2.0))
    assert rep.value == pytest.approx(math.sqrt(2) * 4 / 2.0)
    assert rep.quoted_form == pytest.approx(-math.sqrt(2) * -2.0 / 8)
    assert rep.discrepancy > 1 and rep.notes


def test_log_quotient_root_needs_negative_level():
    from gradgraph.errors import Unattainable
    with pytest.raises(Unattainable):
        isotropic_root(OperatorParams.log_quotient(1.0, 3, 0.5))
