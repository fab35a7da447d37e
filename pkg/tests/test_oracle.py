import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import unitary_group

from stabmetro.graph import Graph, star
from stabmetro.oracle import (
    DenseState,
    LocalModel,
    OracleError,
    OracleLimitError,
    cfi_local,
    corollary_protocol,
    dump_probabilities,
    embed,
    ghz_state,
    graph_state,
    outcome_distribution,
    pauli_terms,
    product_state,
    qfi,
    qfi_model,
    saturation_report,
    theorem_check,
    zero_state,
)
from stabmetro.pauli import X2, Y2, Z2, PauliString, stabilizer_element
from stabmetro.protocol1 import oracle_model

from conftest import random_alpha, random_connected_graph


def xs(n):
    return [(q, X2) for q in range(n)]


def ghz_model(n, theta=0.3, meas=Z2):
    return LocalModel(ghz_state(n), xs(n), [meas] * n, theta)


def test_graph_state_single_edge():
    psi = graph_state(Graph.from_edges(2, [(0, 1)]))
    assert np.allclose(psi.data, 0.5 * np.array([1, 1, 1, -1]))


def test_star_graph_state_matches_ghz_up_to_hadamards():
    n = 5
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    # star state is (|0>|+...+> + |1>|-...->)/sqrt2; a Hadamard on the center gives GHZ
    psi = embed(h, 0, n) @ graph_state(star(n)).data
    assert abs(abs(np.vdot(ghz_state(n).data, psi)) - 1) < 1e-12


def test_fig1a_all_stabilizer_expectations(fig1a):
    psi = graph_state(fig1a)
    for alpha in range(1, 1 << fig1a.n):
        p, _ = stabilizer_element(fig1a, alpha)
        assert abs(psi.expectation(p) - 1) < 1e-10


def test_non_stabilizer_paulis_have_zero_expectation(fig1a, rng):
    psi = graph_state(fig1a)
    keys = {(p.x, p.z) for p in (stabilizer_element(fig1a, a)[0] for a in range(1, 1 << fig1a.n))}
    checked = 0
    while checked < 200:
        x, z = int(rng.integers(0, 1 << 10)), int(rng.integers(0, 1 << 10))
        if (x, z) in keys or (x == 0 and z == 0):
            continue
        assert abs(psi.expectation(PauliString(10, x, z))) < 1e-10
        checked += 1


@pytest.mark.parametrize("n", [3, 6, 9])
def test_qfi_examples(n):
    assert qfi(ghz_state(n), xs(n)) == pytest.approx(n * n, rel=1e-10)
    assert qfi(zero_state(n), xs(n)) == pytest.approx(n, rel=1e-10)
    plus = product_state(np.array([1, 1]) / np.sqrt(2), n)
    assert qfi(plus, xs(n)) == pytest.approx(0, abs=1e-10)


def test_mixed_qfi_matches_pure():
    n = 4
    assert qfi(ghz_state(n).as_mixed(), xs(n)) == pytest.approx(16, rel=1e-10)


def test_qfi_local_unitary_invariance(rng):
    n = 4
    g = random_connected_graph(rng, n)
    psi = graph_state(g)
    h_terms = pauli_terms([("X", 0), ("Z", 1), ("Y", 2), ("X", 3)])
    base = qfi(psi, h_terms)
    us = [unitary_group.rvs(2, random_state=int(rng.integers(1 << 30))) for _ in range(n)]
    rotated = psi.data
    for q, u in enumerate(us):
        rotated = embed(u, q, n) @ rotated
    new_terms = [(q, us[q] @ h @ us[q].conj().T) for q, h in h_terms]
    assert qfi(DenseState(n, rotated), new_terms) == pytest.approx(base, abs=1e-9)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.7])
def test_cfi_examples(theta):
    n = 5
    assert cfi_local(ghz_model(n, theta)) == pytest.approx(25, abs=1e-8)
    zero = LocalModel(zero_state(n), xs(n), [Z2] * n, theta)
    assert cfi_local(zero) == pytest.approx(n, abs=1e-8)
    plus = product_state(np.array([1, 1]) / np.sqrt(2), n)
    assert cfi_local(LocalModel(plus, xs(n), [X2] * n, theta)) == pytest.approx(0, abs=1e-10)


def test_theorem_check_examples():
    k = PauliString.parse("ZZZZ")
    assert theorem_check(ghz_model(4), k).all
    broken = theorem_check(ghz_model(4, meas=X2), k)
    assert not broken.anticommutes_local
    assert broken.stabilizes and broken.anticommutes_collective


def test_corollary_examples():
    m = corollary_protocol(PauliString.parse("ZZZZ"), ghz_state(4))
    assert all(np.allclose(o, Z2) for o in m.measurement)
    assert all(np.allclose(h, X2) for _, h in m.h_terms)
    bell = DenseState(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    m = corollary_protocol(PauliString.parse("XX"), bell, theta=0.4)
    assert all(np.allclose(h, Y2) for _, h in m.h_terms)
    assert cfi_local(m) == pytest.approx(qfi_model(m), abs=1e-9)
    with pytest.raises(OracleError):
        corollary_protocol(PauliString.parse("ZI"), bell)


def test_saturation_report_examples():
    rows, flagged = saturation_report(ghz_model(5), [0, 0.3, np.pi / 2, 1.7, np.pi])
    assert not flagged and all(abs(r.gap) < 1e-8 for r in rows)
    _, flagged = saturation_report(ghz_model(5, meas=X2), [0.3, 1.7])
    assert flagged == [0.3, 1.7]


def test_finite_difference_derivatives(rng):
    for _ in range(5):
        g = random_connected_graph(rng, 5)
        model = oracle_model(g, random_alpha(rng, 5))
        theta, h = 0.7, 1e-5
        p, dp, d2p = outcome_distribution(model, theta, measure_at=theta)
        p_plus, dp_plus, _ = outcome_distribution(model, theta + h, measure_at=theta)
        p_minus, dp_minus, _ = outcome_distribution(model, theta - h, measure_at=theta)
        assert np.max(np.abs((p_plus - p_minus) / (2 * h) - dp)) < 1e-6
        assert np.max(np.abs((dp_plus - dp_minus) / (2 * h) - d2p)) < 1e-6


def test_mixed_model_matches_pure(rng):
    g = random_connected_graph(rng, 4)
    pure = oracle_model(g, random_alpha(rng, 4), theta=0.9)
    mixed = LocalModel(pure.probe.as_mixed(), pure.h_terms, pure.measurement, 0.9)
    for a, b in zip(outcome_distribution(pure, 0.9), outcome_distribution(mixed, 0.9)):
        assert np.allclose(a, b, atol=1e-12)


def test_cfi_never_exceeds_qfi(rng):
    for _ in range(10):
        n = int(rng.integers(2, 6))
        vec = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        state = DenseState.pure(vec / np.linalg.norm(vec))
        h = [(q, [X2, Y2, Z2][int(rng.integers(3))]) for q in range(n)]
        meas = [[X2, Y2, Z2][int(rng.integers(3))] for _ in range(n)]
        model = LocalModel(state, h, meas, float(rng.uniform(0, np.pi)))
        assert cfi_local(model) <= qfi_model(model) + 1e-9


def test_limits_and_validation():
    with pytest.raises(OracleLimitError):
        ghz_state(17)
    with pytest.raises(OracleError):
        DenseState.pure(np.ones(4))
    with pytest.raises(OracleError):
        LocalModel(ghz_state(2), [(0, X2), (0, Z2)], [Z2, Z2])
    degenerate = LocalModel(ghz_state(2), [(0, X2)], [np.eye(2), Z2])
    with pytest.raises(OracleError):
        cfi_local(degenerate)


def test_encoding_convention():
    # exp(-i theta H/2) with H = X on |0> gives Z-expectation cos(theta);
    # outcomes follow ascending eigenvalue order, so index 1 is the +1 result
    model = LocalModel(zero_state(1), [(0, X2)], [Z2], 0.0)
    p, _, _ = outcome_distribution(model, 0.8, measure_at=0.0)
    assert p[1] - p[0] == pytest.approx(np.cos(0.8))
    u = expm(-0.4j * X2)
    assert np.allclose(u @ np.array([1, 0]), [np.cos(0.4), -1j * np.sin(0.4)])


def test_dump_probabilities(tmp_path):
    f = tmp_path / "p.csv"
    dump_probabilities(ghz_model(3), 0.3, f)
    lines = f.read_text().splitlines()
    assert lines[0] == "outcome,p,dp_dtheta" and len(lines) == 9
    assert sum(float(line.split(",")[1]) for line in lines[1:]) == pytest.approx(1)
