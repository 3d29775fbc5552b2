import pytest

from twistk.susy import invariant_gamma_trace, invariant_sphere_flux

from conftest import get_family

ALL_MODULES = [(k, tj) for k in (1, 2, 3) for tj in range(k + 1)]


@pytest.mark.parametrize("k,two_j0", ALL_MODULES)
def test_gamma_trace_counts_vacuum_multiplet(k, two_j0):
    rec = invariant_gamma_trace(get_family(k, two_j0))
    assert abs(rec["invariant"] - (two_j0 + 1)) < 1e-9
    assert rec["dim_ker_Qplus"] == 2 * (two_j0 + 1)
    assert not rec["kernel_ambiguous"]


@pytest.mark.parametrize("k,two_j0", [(1, 0), (1, 1), (2, 2)])
def test_sphere_flux_converges_to_gamma_trace(k, two_j0):
    fam = get_family(k, two_j0)
    target = invariant_gamma_trace(fam)["invariant"]
    errors = []
    for nt, np_ in ((12, 24), (24, 48), (48, 96)):
        rec = invariant_sphere_flux(fam, nt, np_)
        assert abs(rec["flux_imag"]) < 1e-9
        errors.append(abs(rec["flux"] - target))
    assert errors[0] >= errors[1] >= errors[2]
    assert errors[2] < 1e-2
