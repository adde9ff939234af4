import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabcert.iqc import (
    IqcCertificate,
    assemble_lmi,
    certificate_from_json,
    certificate_to_json,
    iqc_holds_for_gradient,
    sector_multipliers,
)
from stabcert.optimizers import SectorBounds, Sgd, lure_of


def test_sector_multiplier_entries():
    pi1, pi2 = sector_multipliers(SectorBounds(0.25, 2.0))
    np.testing.assert_allclose(pi1, [[-0.25, 0.5], [0.5, 0.0]])
    np.testing.assert_allclose(pi2, [[0.0, 0.5], [0.5, -0.5]])


def test_multipliers_encode_the_sector_inequalities():
    # For u = h*y with h in [gamma, beta] both forms [y u] Pi [y u]^T
    # must be nonnegative, with equality exactly at the endpoints.
    sb = SectorBounds(0.3, 1.7)
    pi1, pi2 = sector_multipliers(sb)
    for h in np.linspace(sb.gamma, sb.beta, 9):
        z = np.array([1.0, h])
        v1 = float(z @ pi1 @ z)
        v2 = float(z @ pi2 @ z)
        assert v1 >= -1e-12 and v2 >= -1e-12
    z_lo = np.array([1.0, sb.gamma])
    assert float(z_lo @ pi1 @ z_lo) == pytest.approx(0.0, abs=1e-15)
    z_hi = np.array([1.0, sb.beta])
    assert float(z_hi @ pi2 @ z_hi) == pytest.approx(0.0, abs=1e-15)


def test_iqc_holds_for_quadratic_gradients():
    sb = SectorBounds(0.2, 1.0)
    rng = np.random.default_rng(2)
    for _ in range(50):
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        h = (q * rng.uniform(sb.gamma, sb.beta, size=4)) @ q.T
        v1, v2 = iqc_holds_for_gradient(sb, h, rng.normal(size=4), rng.normal(size=4))
        assert v1 >= -1e-10 and v2 >= -1e-10


def test_iqc_rejects_out_of_sector_hessians():
    sb = SectorBounds(0.2, 1.0)
    w = np.ones(2)
    w2 = np.zeros(2)
    with pytest.raises(ValueError, match="below gamma"):
        iqc_holds_for_gradient(sb, np.diag([0.05, 0.5]), w, w2)
    with pytest.raises(ValueError, match="above beta"):
        iqc_holds_for_gradient(sb, np.diag([0.5, 2.0]), w, w2)


def test_lmi_hand_built_sgd_oracle():
    # SGD has A=[1], B=[-eta], C=[1], D=[0].  The 2x2 LMI is then
    #   [[p - (1-rho) p + lam - tau1*gamma,  -eta p + (tau1+tau2)/2],
    #    [-eta p + (tau1+tau2)/2,            eta^2 p - tau2/beta]]
    sb = SectorBounds(0.1, 1.0)
    eta, p, lam, t1, t2, rho = 0.7, 1.3, 0.01, 0.2, 0.4, 0.05
    got = assemble_lmi(lure_of(Sgd(eta), sb), sb, np.array([[p]]), lam, t1, t2, rho)
    want = np.array(
        [
            [p - (1 - rho) * p + lam - t1 * sb.gamma, -eta * p + 0.5 * (t1 + t2)],
            [-eta * p + 0.5 * (t1 + t2), eta * eta * p - t2 / sb.beta],
        ]
    )
    np.testing.assert_allclose(got, want, atol=1e-14)


@given(
    st.floats(0.1, 2.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 0.5),
    st.floats(0.0, 1.0),
)
@settings(max_examples=150, deadline=None)
def test_lmi_is_affine_in_the_variables(p_val, lam, tau1, tau2, w):
    # convex combination of variable tuples maps to the same combination
    # of LMI matrices (rho and data held fixed)
    sb = SectorBounds(0.2, 1.0)
    system = lure_of(Sgd(0.5), sb)
    pa, pb = np.array([[p_val]]), np.array([[2.0 * p_val + 0.3]])
    la, lb = lam, 0.7 * lam + 0.1
    t1a, t1b = tau1, 0.5 * tau1 + 0.2
    t2a, t2b = tau2, tau2 + 0.4
    ma = assemble_lmi(system, sb, pa, la, t1a, t2a, rho=0.1)
    mb = assemble_lmi(system, sb, pb, lb, t1b, t2b, rho=0.1)
    mix = assemble_lmi(
        system,
        sb,
        w * pa + (1 - w) * pb,
        w * la + (1 - w) * lb,
        w * t1a + (1 - w) * t1b,
        w * t2a + (1 - w) * t2b,
        rho=0.1,
    )
    np.testing.assert_allclose(mix, w * ma + (1 - w) * mb, atol=1e-10)


def test_lmi_shape_validation():
    sb = SectorBounds(0.2, 1.0)
    system = lure_of(Sgd(0.5), sb)
    with pytest.raises(ValueError, match="P must be"):
        assemble_lmi(system, sb, np.eye(2), 0.0, 0.0, 0.0)


def test_certificate_json_round_trip(tmp_path):
    cert = IqcCertificate(
        optimizer="nag-sq",
        gamma=0.1,
        beta=1.0,
        p=np.array([[1.0, -0.45], [-0.45, 0.3]]),
        lam=1e-6,
        tau1=0.2,
        tau2=0.8,
        rho=0.0,
        lmi_max_eig=-1.3e-4,
        p_min_eig=0.09,
        status="Feasible",
        solver_seed=7,
    )
    text = certificate_to_json(cert)
    path = tmp_path / "cert.json"
    path.write_text(text)
    back = certificate_from_json(path.read_text())
    assert back.optimizer == cert.optimizer
    assert back.status == cert.status
    assert back.solver_seed == cert.solver_seed
    np.testing.assert_allclose(back.p, cert.p)
    for name in ("gamma", "beta", "lam", "tau1", "tau2", "rho", "lmi_max_eig", "p_min_eig"):
        assert getattr(back, name) == getattr(cert, name)
    # serialized form is stable: sorted keys, lambda spelled out
    assert '"lambda"' in text
    assert text == certificate_to_json(back)


def test_certificate_json_rejects_non_square_p():
    cert_text = certificate_to_json(
        IqcCertificate(
            optimizer="sgd",
            gamma=0.1,
            beta=1.0,
            p=np.array([[1.0]]),
            lam=0.0,
            tau1=0.0,
            tau2=0.0,
            rho=0.0,
            lmi_max_eig=0.0,
            p_min_eig=1.0,
            status="Inconclusive",
            solver_seed=0,
        )
    )
    import json

    raw = json.loads(cert_text)
    raw["P"] = [1.0, 2.0, 3.0]
    with pytest.raises(ValueError, match="not square"):
        certificate_from_json(json.dumps(raw))


def test_recompute_eigs_matches_stored():
    sb = SectorBounds(0.1, 1.0)
    system = lure_of(Sgd(1.0), sb)
    p = np.array([[0.8]])
    lam, t1, t2 = 1e-4, 0.05, 0.6
    lmi = assemble_lmi(system, sb, p, lam, t1, t2)
    cert = IqcCertificate(
        optimizer="sgd",
        gamma=sb.gamma,
        beta=sb.beta,
        p=p,
        lam=lam,
        tau1=t1,
        tau2=t2,
        rho=0.0,
        lmi_max_eig=float(np.linalg.eigvalsh(lmi)[-1]),
        p_min_eig=0.8,
        status="Feasible",
        solver_seed=0,
    )
    top, bottom = cert.recompute_eigs(system, sb)
    assert top == pytest.approx(cert.lmi_max_eig, abs=1e-10)
    assert bottom == pytest.approx(0.8, abs=1e-12)
