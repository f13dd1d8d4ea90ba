"""End-to-end verification suite.

Thirteen self-contained criteria, each cross-checking a closed-form
result against an independent oracle (Monte Carlo sampling, an
alternative representation, or a classical special-function identity)
at a frozen seed and tolerance.  Each criterion returns
{id, description, passed, details}.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.stats

from . import asymptotics as _asy
from . import ensembles as _ens
from . import exact_ev as _ev
from . import exact_sv as _sv
from . import exponents as _ex
from . import harness as _h
from .specfun import digamma, trigamma


def _result(cid, description, passed, details):
    return {
        "id": cid,
        "description": description,
        "passed": bool(passed),
        "details": details,
    }


def criterion_1(seed=0):
    """Single-factor reductions to classical Ginibre forms."""
    model = _ev.eigen_model(_ens.ginibre_spec(2, 4, (0,)))
    rs = np.linspace(0.05, 2.5, 25)
    w = _ev.weight_values(model, rs)
    dev_w = float(np.max(np.abs(w / np.exp(-rs ** 2) - 1.0)))
    tmodel = _ev.eigen_model(_ens.truncated_spec(2, 3, (0,), (1,)))
    inside = _ev.weight_values(tmodel, np.linspace(0.05, 0.95, 10))
    outside = _ev.weight_values(tmodel, np.array([1.1, 1.5, 3.0]))
    dev_t = max(float(np.max(np.abs(inside - 1.0))),
                float(np.max(np.abs(outside))))
    kern = _asy.LimitKernel("OriginHypergeometric", nus=(0.0,))
    dev_k = 0.0
    for u in (0.3 + 0.2j, -0.5 + 0.1j, 1.0 + 0.0j):
        for v in (0.1 - 0.4j, 0.7 + 0.7j):
            exact = np.exp(u * np.conj(v)) / math.pi
            dev_k = max(dev_k, abs(_asy.eval_limit_kernel(kern, u, v) / exact - 1.0))
    passed = dev_w <= 1e-9 and dev_t <= 1e-9 and dev_k <= 1e-9
    return _result(1, "single-factor weight and kernel reductions", passed, {
        "gaussian_weight_dev": dev_w,
        "truncated_weight_dev": dev_t,
        "origin_kernel_dev": float(dev_k),
    })


def criterion_2(seed=20):
    """MC radial histogram vs exact density, two Gaussian factors."""
    spec = _ens.ginibre_spec(2, 4, (0, 1))
    rep = _h.radial_comparison(spec, 200000, seed)
    return _result(2, "beta=2 Ginibre product radial density vs MC",
                   rep["verdict"] == "pass",
                   {"sup_z": rep["sup_z"],
                    "min_expected": float(np.min(rep["expected"]))})


def criterion_3(seed=30):
    """Same comparison for truncated and inverse-mixed products."""
    rep_t = _h.radial_comparison(
        _ens.truncated_spec(2, 3, (0, 0), (2, 3)), 200000, seed)
    rep_i = _h.radial_comparison(
        _ens.inverse_mixed_spec(2, 3, (0,), (1,)), 200000, seed + 1)
    passed = rep_t["verdict"] == "pass" and rep_i["verdict"] == "pass"
    return _result(3, "truncated and inverse-mixed radial density vs MC",
                   passed,
                   {"truncated_sup_z": rep_t["sup_z"],
                    "inverse_mixed_sup_z": rep_i["sup_z"]})


def criterion_4(seed=40):
    """beta=4 Pfaffian one-point function vs MC; real-axis repulsion."""
    spec = _ens.ginibre_spec(4, 3, (0, 0))
    rep = _h.radial_comparison(spec, 100000, seed)
    model = _ev.eigen_model(spec)
    axis = float(np.max(np.abs(
        _ev.density(model, np.array([0.4 + 0j, 0.9 + 0j, 1.6 + 0j])))))
    passed = rep["verdict"] == "pass" and axis < 1e-8
    return _result(4, "beta=4 product density vs MC and real-axis zero",
                   passed, {"sup_z": rep["sup_z"], "axis_density": axis})


def criterion_5(seed=50):
    """Hole probability: closed form vs quadrature vs MC."""
    spec = _ens.ginibre_spec(2, 4, (0, 1))
    model = _ev.eigen_model(spec)
    n_samples = 200000
    radii = _ens.eigenvalue_radii_batch(spec, n_samples, _ens.make_rng(seed))
    radii = radii.reshape(n_samples, spec.n)
    details = {}
    passed = True
    for r in (0.3, 0.5, 0.8):
        closed = _ev.hole_probability(model, r, method="closed")
        quad = _ev.hole_probability(model, r, method="quadrature")
        mc = float(np.mean(np.all(radii > r, axis=1)))
        se = math.sqrt(max(mc * (1.0 - mc), 1e-12) / n_samples)
        tol = max(1e-4, 3.0 * se)
        worst = max(abs(closed - quad), abs(closed - mc), abs(quad - mc))
        details["r=%.1f" % r] = {"closed": closed, "quadrature": quad,
                                 "mc": mc, "tolerance": tol,
                                 "max_pairwise": worst}
        passed = passed and worst <= tol
    return _result(5, "hole probability triple cross-check", passed, details)


def criterion_6(seed=0):
    """Biorthogonality, multiple orthogonality, and recurrences."""
    details = {}
    passed = True
    systems = {
        "gaussian": _sv.sv_system(_ens.ginibre_spec(2, 11, (0, 1, 2))),
        "inverse_mixed": _sv.sv_system(_ens.inverse_mixed_spec(2, 10, (0,), (1,))),
        "truncated": _sv.sv_system(_ens.truncated_spec(2, 10, (0, 0), (10, 12))),
    }
    for name, system in systems.items():
        gram = _sv.gram_matrix(system, 10)
        dev = float(np.max(np.abs(gram - np.eye(11))))
        details["gram_%s" % name] = dev
        passed = passed and dev <= 1e-8
    gin = _sv.sv_system(_ens.ginibre_spec(2, 4, (0, 1)))
    mo = _sv.check_multiple_orthogonality(gin, 8)
    details["multiple_orthogonality_gaussian"] = mo["max_residual"]
    passed = passed and mo["max_residual"] <= 1e-8
    mix = _sv.sv_system(_ens.inverse_mixed_spec(2, 4, (0,), (3,)))
    viol = _sv.check_multiple_orthogonality(mix, 3)
    details["mixed_violation"] = viol["max_residual"]
    passed = passed and viol["max_residual"] > 1e-3
    rec = _sv.check_recurrence(gin, [2, 3, 4])
    res = max(rec["max_poly_residual"], rec["max_psi_residual"])
    details["recurrence_residual"] = res
    passed = passed and res <= 1e-7
    return _result(6, "singular-value biorthogonal structure", passed, details)


def criterion_7(seed=0):
    """Kernel sum form vs double-contour form at nine points."""
    system = _sv.sv_system(_ens.ginibre_spec(2, 4, (0, 1)))
    worst = 0.0
    for x in (0.5, 2.0, 5.0):
        for y in (0.5, 2.0, 5.0):
            s = _sv.kernel_sum(system, x, y)
            c = _sv.kernel_contour(system, x, y)
            worst = max(worst, abs(s - c) / max(abs(s), 1e-300))
    return _result(7, "kernel sum vs contour representation", worst <= 1e-7,
                   {"max_relative_deviation": worst})


def criterion_8(seed=0):
    """Hard-edge convergence and the Bessel reduction."""
    details = {}
    passed = True
    for nus in ((0,), (0, 1)):
        rep = _asy.converge_hard_edge(_ens.ginibre_spec(2, 8, nus), [16, 64])
        details["deviations_M%d" % len(nus)] = [float(d) for d in rep["deviations"]]
        passed = passed and rep["deviations"][1] < rep["deviations"][0]
    for nu in (0.0, 1.0):
        km = _asy.LimitKernel("MeijerHardEdge", nus=(nu,))
        kb = _asy.LimitKernel("Bessel", nus=(nu,))
        worst = 0.0
        for x in (0.5, 1.0, 2.0):
            for y in (0.5, 1.0, 2.0):
                a = _asy.eval_limit_kernel(km, x, y)
                b = 4.0 * (y / x) ** (nu / 2.0) * _asy.eval_limit_kernel(
                    kb, 4.0 * x, 4.0 * y)
                worst = max(worst, abs(a / b - 1.0))
        details["bessel_dev_nu%d" % int(nu)] = worst
        passed = passed and worst <= 1e-8
    return _result(8, "hard-edge convergence and Bessel reduction", passed,
                   details)


def criterion_9(seed=0):
    """Origin-kernel truncation error within the series tail bound."""
    details = {}
    passed = True
    for nus in ((0,), (0, 1), (0, 1, 2)):
        spec = _ens.ginibre_spec(2, 8, nus)
        rep = _asy.converge_origin(spec, [20, 40, 60])
        devs = rep["deviations"]
        bounds = rep["bounds"]
        ok = all(float(d) <= float(b) * (1.0 + 1e-9) + 1e-300
                 for d, b in zip(devs, bounds))
        ok = ok and all(float(b) < float(a) for a, b in zip(devs, devs[1:]))
        details["M%d" % len(nus)] = {
            "deviations": [float(d) for d in devs],
            "bounds": [float(b) for b in bounds]}
        passed = passed and ok
    return _result(9, "origin-kernel series tail bound", passed, details)


def criterion_10(seed=100):
    """Lyapunov and stability exponents vs digamma formulas."""
    spec = _ens.ginibre_spec(2, 4, (0,))
    exact = _ex.exact_exponents(spec)
    lyap = _ex.mc_lyapunov(spec, 10000, 200, seed=seed)
    z_l = (lyap["means"] - np.array(exact.means)) / lyap["standard_errors"]
    ratio = lyap["replica_values"].var(axis=0, ddof=1) * 10000 / (
        np.array(exact.sigmas) ** 2)
    stab = _ex.mc_stability(spec, 500, 400, seed=seed + 1)
    z_s = (stab["means"] - np.array(exact.means)) / stab["standard_errors"]
    passed = (float(np.max(np.abs(z_l))) <= 4.0
              and bool(np.all((ratio >= 0.8) & (ratio <= 1.25)))
              and float(np.max(np.abs(z_s))) <= 4.0)
    return _result(10, "Lyapunov and stability exponents", passed, {
        "lyapunov_z": [float(v) for v in z_l],
        "variance_ratio": [float(v) for v in ratio],
        "stability_z": [float(v) for v in z_s],
    })


def criterion_11(seed=110):
    """Truncated-product top exponent approaches -1/2."""
    spec = _ens.truncated_spec(2, 3, (0,), (1,))
    est = _ex.mc_lyapunov(spec, 4000, 60, seed=seed)
    z = abs(est["means"][0] - (-0.5)) / est["standard_errors"][0]
    return _result(11, "truncated-factor smallest exponent", z <= 4.0,
                   {"estimate": float(est["means"][0]),
                    "standard_error": float(est["standard_errors"][0]),
                    "z": float(z)})


def _all_real_fraction(n_factors, n_samples, seed):
    """MC probability that a product of 2x2 Gaussian factors is all-real."""
    rng = _ens.make_rng(seed)
    hits = 0
    chunk = 100000
    left = n_samples
    while left > 0:
        b = min(chunk, left)
        prod = rng.standard_normal((b, 2, 2))
        for _ in range(n_factors - 1):
            prod = rng.standard_normal((b, 2, 2)) @ prod
        tr = prod[:, 0, 0] + prod[:, 1, 1]
        det = prod[:, 0, 0] * prod[:, 1, 1] - prod[:, 0, 1] * prod[:, 1, 0]
        hits += int(np.sum(tr * tr - 4.0 * det >= 0.0))
        left -= b
    return hits / n_samples


def criterion_12(seed=120):
    """Probability that all eigenvalues are real, N = 2."""
    n_samples = 1000000
    details = {}
    passed = True
    fracs = []
    for m in (1, 2):
        spec = _ens.ginibre_spec(1, 2, (0,) * m)
        exact = _ev.prob_all_real(spec)
        mc = _all_real_fraction(m, n_samples, seed + m)
        se = math.sqrt(mc * (1.0 - mc) / n_samples)
        tol = max(1e-3, 3.0 * se)
        details["M%d" % m] = {"exact": exact, "mc": mc, "tolerance": tol}
        passed = passed and abs(exact - mc) <= tol
        fracs.append(mc)
    passed = passed and fracs[1] > fracs[0]
    passed = passed and abs(details["M1"]["exact"] - 1.0 / math.sqrt(2.0)) < 1e-9
    return _result(12, "beta=1 all-real probability vs MC", passed, details)


def criterion_13(seed=130):
    """Factor-order invariance of norms and spectra."""
    a = _ev.log_moments(_ens.ginibre_spec(2, 4, (0, 1, 2)))
    b = _ev.log_moments(_ens.ginibre_spec(2, 4, (2, 0, 1)))
    bit_identical = tuple(a) == tuple(b)
    r1 = _ens.eigenvalue_radii_batch(
        _ens.ginibre_spec(2, 3, (0, 1)), 5000, _ens.make_rng(seed))
    r2 = _ens.eigenvalue_radii_batch(
        _ens.ginibre_spec(2, 3, (1, 0)), 5000, _ens.make_rng(seed + 1))
    ks = scipy.stats.ks_2samp(r1.ravel(), r2.ravel())
    passed = bit_identical and ks.pvalue > 0.01
    return _result(13, "ordering invariance of norms and spectra", passed,
                   {"bit_identical_norms": bit_identical,
                    "ks_pvalue": float(ks.pvalue)})


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
    criterion_11, criterion_12, criterion_13,
)


def run_all(seed=None):
    """Run every criterion; a common seed offset can shift the MC draws."""
    offset = 0 if seed is None else int(seed)
    results = []
    for i, crit in enumerate(CRITERIA, start=1):
        results.append(crit(seed=offset + 10 * i))
    return results
