import math

import numpy as np
import pytest

from wigner_witness import (
    NotViolatedError, P_REFLECT, QuadratureSpec, TmstParams, WernerParams,
    CatParams, criterion2, gaussian_wigner, maximize_bell, optimize_criterion,
    optimize_purity, shrink_region, standard_form, state_to_wigner, vacuum,
)

import refvals


def test_result_never_below_any_seed():
    """The final value must dominate the whole restart lattice."""
    w = state_to_wigner(TmstParams(s=0.5, eta=0.6, r=0.4))
    res = optimize_criterion(w, "C1")
    objectives = [obj for _, obj in res.trace]
    # trace logs bound margins; the last entry is the final report
    assert objectives[-1] >= max(objectives[:-1]) - 1e-9


def test_optimum_matches_closed_form_on_fixed_states():
    cases = [
        (math.cosh(0.6), math.cosh(0.6), math.sinh(0.6), -math.sinh(0.6)),
        (1.9, 1.4, 0.55, -0.35),
        (2.2, 1.1, -0.25, 0.15),
    ]
    for n, m, c1, c2 in cases:
        g = standard_form(n, m, c1, c2)
        res = optimize_criterion(gaussian_wigner(g), "C1")
        want = refvals.gaussian_imax(n, m, c1, c2)
        assert abs(res.best_value - want) < 1e-5
        assert res.report.violated == refvals.gaussian_entangled(n, m, c1, c2)


def test_optimizer_silent_on_vacuum():
    res = optimize_criterion(gaussian_wigner(vacuum()), "C1")
    assert not res.report.violated
    # saturation, not violation: the bound itself is the supremum
    assert res.best_value <= 1.0 / (2 * math.pi) + 1e-9


def test_c3_search_has_no_mixing_angle():
    w = state_to_wigner(WernerParams(bell="psi+", epsilon=0.9))
    res = optimize_criterion(w, "C3")
    assert res.best_theta is None
    assert res.report.violated
    assert res.best_value < 0


def test_c2_search_returns_angle_and_beats_fixed_choice():
    w = state_to_wigner(TmstParams(s=0.5, eta=0.5, r=0.5))
    res = optimize_criterion(w, "C2")
    assert res.best_theta is not None
    fixed = criterion2(w, P_REFLECT, math.pi / 4)
    assert (res.report.value - res.report.bound) >= (fixed.value - fixed.bound) - 1e-9


def test_purity_angle_optimum():
    rng = np.random.default_rng(31)
    for _ in range(4):
        g, (n, m, c1, _) = refvals.random_standard_form(rng, symmetric_c=True)
        rep = optimize_purity(gaussian_wigner(g))
        want = refvals.purity_max(n, m, c1)
        assert abs(rep.value - want) < 1e-8
        assert rep.violated == refvals.purity_entangled(n, m, c1)


def test_invalid_which_token():
    with pytest.raises(ValueError):
        optimize_criterion(gaussian_wigner(vacuum()), "C4")


def test_shrink_region_requires_violation():
    with pytest.raises(NotViolatedError):
        shrink_region(gaussian_wigner(vacuum()), P_REFLECT, math.pi / 4)


def test_shrink_region_keeps_violation_on_disks():
    w = state_to_wigner(WernerParams(bell="phi+", epsilon=1.0))
    reg = shrink_region(w, P_REFLECT, math.pi / 4)
    assert reg.kind == "disk-union"
    rep = criterion2(w, P_REFLECT, math.pi / 4, region=reg)
    assert rep.value > rep.bound + 2 * rep.error_estimate


def test_bell_maximum_on_product_state_stays_local():
    val, _ = maximize_bell(gaussian_wigner(vacuum()))
    assert val <= 2.0 + 1e-9


def test_bell_maximum_grows_with_epsilon():
    v1, _ = maximize_bell(state_to_wigner(WernerParams(bell="phi+", epsilon=0.93)))
    v2, _ = maximize_bell(state_to_wigner(WernerParams(bell="phi+", epsilon=1.0)))
    assert v2 > v1 > 2.0
