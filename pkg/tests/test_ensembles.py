"""Samplers: Haar matrices, induced factors, spec serialization, CSV output."""

import json

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from prodrmt.ensembles import (
    FactorSpec,
    ProductSpec,
    ginibre_spec,
    inverse_mixed_spec,
    make_rng,
    manifest_json,
    realize_product,
    sample_batch,
    sample_ginibre,
    sample_haar_unitary,
    sample_induced_ginibre,
    sample_induced_truncated,
    sample_truncated_unitary,
    samples_to_csv,
    truncated_spec,
)
from prodrmt.specfun import DomainError


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_haar_unitarity(beta):
    rng = make_rng(11, beta)
    k = 6
    u = sample_haar_unitary(beta, k, rng)
    dim = u.shape[0]
    assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) <= 1e-13


def test_haar_quaternion_structure():
    rng = make_rng(12)
    k = 5
    u = sample_haar_unitary(4, k, rng)
    j = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
    assert np.max(np.abs(u - j @ u.conj() @ j.T)) <= 1e-13


def test_ginibre_variance_convention():
    rng = make_rng(13)
    x = sample_ginibre(2, 400, 400, rng)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.02)
    y = sample_ginibre(4, 200, 200, rng)
    a = y[:200, :200]
    b = y[:200, 200:]
    assert np.mean(np.abs(a) ** 2) == pytest.approx(0.5, abs=0.02)
    assert np.mean(np.abs(b) ** 2) == pytest.approx(0.5, abs=0.02)


def test_truncated_entry_beta_distribution():
    # |U_11|^2 of a Haar unitary of size k follows Beta(1, k - 1).
    rng = make_rng(14)
    k = 5
    vals = np.array([
        np.abs(sample_truncated_unitary(2, k, 1, 1, rng)[0, 0]) ** 2
        for _ in range(3000)
    ])
    stat = scipy.stats.kstest(vals, scipy.stats.beta(1, k - 1).cdf)
    assert stat.pvalue > 1e-3


def test_induced_ginibre_radius_distribution():
    # 1x1 induced factor with offset nu: |x|^2 follows Gamma(nu + 1, 1).
    rng = make_rng(15)
    vals = np.array([
        np.abs(sample_induced_ginibre(2, 1, 1, rng)[0, 0]) ** 2
        for _ in range(3000)
    ])
    stat = scipy.stats.kstest(vals, scipy.stats.gamma(2.0).cdf)
    assert stat.pvalue > 1e-3


def test_quaternion_scalar_radius_distribution():
    # 1x1 quaternion Gaussian: |a|^2 + |b|^2 follows Gamma(2, 1/2).
    rng = make_rng(16)
    vals = []
    for _ in range(3000):
        y = sample_ginibre(4, 1, 1, rng)
        vals.append(np.abs(y[0, 0]) ** 2 + np.abs(y[0, 1]) ** 2)
    stat = scipy.stats.kstest(np.array(vals), scipy.stats.gamma(2.0, scale=0.5).cdf)
    assert stat.pvalue > 1e-3


def test_induced_truncated_requires_depth_above_offset():
    rng = make_rng(17)
    with pytest.raises(DomainError):
        sample_induced_truncated(2, 3, 2, 2, rng)


def test_factor_spec_validation():
    with pytest.raises(DomainError):
        FactorSpec("unknown_kind")
    with pytest.raises(DomainError):
        FactorSpec("truncated_unitary", 1)
    with pytest.raises(DomainError):
        FactorSpec("ginibre", 0, truncation=3)
    with pytest.raises(DomainError):
        ProductSpec(3, 2, (FactorSpec("ginibre"),))
    with pytest.raises(DomainError):
        ProductSpec(2, 2, ())


@settings(deadline=None, max_examples=20)
@given(st.integers(1, 6), st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_spec_json_roundtrip(n, nus):
    spec = ginibre_spec(2, n, tuple(nus))
    again = ProductSpec.from_json_dict(json.loads(json.dumps(spec.to_json_dict())))
    assert again == spec


def test_spec_json_roundtrip_truncated():
    spec = truncated_spec(4, 3, (0, 1), (2, 4))
    again = ProductSpec.from_json_dict(spec.to_json_dict())
    assert again == spec
    payload = json.loads(manifest_json(spec, extra={"seed": 7}))
    assert payload["seed"] == 7
    assert ProductSpec.from_json_dict(payload["spec"]) == spec


def test_rng_determinism_and_streams():
    a = make_rng(99, 0).standard_normal(5)
    b = make_rng(99, 0).standard_normal(5)
    c = make_rng(99, 1).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_beta4_sample_shapes():
    spec = ginibre_spec(4, 3, (0, 1))
    s = realize_product(spec, make_rng(21), want_singular_values=True)
    assert s.eigenvalues.shape == (3,)
    assert np.all(s.eigenvalues.imag >= -1e-12)
    assert s.squared_singular_values.shape == (3,)


def test_inverse_mixed_sampling():
    spec = inverse_mixed_spec(2, 3, (0,), (1,))
    samples, rejected = sample_batch(spec, 20, make_rng(22),
                                     want_singular_values=True)
    assert rejected == 0
    for s in samples:
        assert np.all(np.isfinite(s.eigenvalues))
        assert np.all(s.squared_singular_values > 0)


def test_samples_to_csv_deterministic(tmp_path):
    spec = ginibre_spec(2, 2, (0,))
    out = []
    for seed in (31, 31):
        samples, _ = sample_batch(spec, 10, make_rng(seed), seed=seed)
        path = tmp_path / ("s%d.csv" % len(out))
        samples_to_csv(samples, path)
        out.append(path.read_bytes())
    assert out[0] == out[1]
    header = out[0].decode().splitlines()[0]
    assert header == "re,im,sv,replica,seed"
