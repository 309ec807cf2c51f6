#!/usr/bin/env python3
"""Generate the committed test fixtures.

Reference values are produced independently of the C++ library:
the logistic fit comes from statsmodels (IRLS with a tight tolerance)
and every derived quantity is recomputed here from first principles
with numpy. Output files land in ../fixtures/.

Run from this directory:  python3 make_fixtures.py
"""

import json
import os
import numpy as np
import statsmodels.api as sm

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")


def invlogit(eta):
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def write_csv(path, y, z, covs, cov_names):
    with open(path, "w") as f:
        f.write("y,z," + ",".join(cov_names) + "\n")
        for i in range(len(y)):
            row = [str(int(y[i])), str(int(z[i]))] + [repr(float(c[i])) for c in covs]
            f.write(",".join(row) + "\n")


def reference_fit(y, X):
    """Logistic MLE via statsmodels, plus model quantities from the
    defining formulas: fitted probabilities, residuals, W, (X'WX)^-1,
    and the diagonal of W^(1/2) X (X'WX)^-1 X' W^(1/2)."""
    res = sm.GLM(y, X, family=sm.families.Binomial()).fit(tol=1e-13, maxiter=200)
    b = np.asarray(res.params, dtype=float)
    eta = X @ b
    pi = invlogit(eta)
    score = X.T @ (y - pi)
    assert np.max(np.abs(score)) < 1e-9, f"score not converged: {score}"
    w = pi * (1.0 - pi)
    xtwx = X.T @ (X * w[:, None])
    vmodel = np.linalg.inv(xtwx)
    vmodel = 0.5 * (vmodel + vmodel.T)
    sw = np.sqrt(w)
    half = (X * sw[:, None]) @ vmodel
    hat = np.einsum("ij,ij->i", half, X * sw[:, None])
    resid = y - pi
    return b, pi, resid, hat, vmodel, xtwx


def hc_weights(resid, hat, n, p, kind):
    e2 = resid**2
    hbar = p / n
    if kind == "const":
        return np.full(n, np.sum(e2) / (n - p))
    if kind == "HC0":
        return e2
    if kind == "HC1":
        return e2 * n / (n - p)
    if kind == "HC2":
        return e2 / (1.0 - hat)
    if kind == "HC3":
        return e2 / (1.0 - hat) ** 2
    if kind == "HC4":
        delta = np.minimum(4.0, hat / hbar)
        return e2 / (1.0 - hat) ** delta
    if kind == "HC4m":
        delta = np.minimum(1.0, hat / hbar) + np.minimum(1.5, hat / hbar)
        return e2 / (1.0 - hat) ** delta
    if kind == "HC5":
        hmax = np.max(hat)
        delta = 0.5 * np.minimum(hat / hbar, max(4.0, 0.7 * hmax / hbar))
        return e2 / (1.0 - hat) ** delta
    raise ValueError(kind)


def sandwich(X, vmodel, omega):
    meat = X.T @ (X * omega[:, None])
    v = vmodel @ meat @ vmodel
    return 0.5 * (v + v.T)


def counterfactuals(X, b):
    X1 = X.copy()
    X0 = X.copy()
    X1[:, 1] = 1.0
    X0[:, 1] = 0.0
    return X1, X0, invlogit(X1 @ b), invlogit(X0 @ b)


def ame_gradients_numeric(X, b):
    """Average-marginal-effect gradients via central differences, the
    route used by marginal-effects tooling (independent of the analytic
    expression)."""
    X1, X0, _, _ = counterfactuals(X, b)

    def bar(Xj, bb):
        return float(np.mean(invlogit(Xj @ bb)))

    p = len(b)
    g1 = np.zeros(p)
    g0 = np.zeros(p)
    for k in range(p):
        h = 1e-5 * max(1.0, abs(b[k]))
        bp = b.copy(); bp[k] += h
        bm = b.copy(); bm[k] -= h
        g1[k] = (bar(X1, bp) - bar(X1, bm)) / (2 * h)
        g0[k] = (bar(X0, bp) - bar(X0, bm)) / (2 * h)
    return g1, g0


def eif_variance(X, b, y):
    n = X.shape[0]
    eta = X @ b
    pi = invlogit(eta)
    X1, X0, pi1, pi0 = counterfactuals(X, b)
    M = (X.T @ (X * (pi * (1 - pi))[:, None])) / n
    Minv = np.linalg.inv(M)
    lam_b = (Minv @ X.T).T * (y - pi)[:, None]  # n x p rows
    d1 = np.mean(X1 * (pi1 * (1 - pi1))[:, None], axis=0)
    d0 = np.mean(X0 * (pi0 * (1 - pi0))[:, None], axis=0)
    lam1 = (pi1 - np.mean(pi1)) + lam_b @ d1
    lam0 = (pi0 - np.mean(pi0)) + lam_b @ d0
    lam = lam1 - lam0
    return float(np.var(lam, ddof=1) / n), float(np.mean(lam))


def semiparam_variance(X, b, y, z):
    n = X.shape[0]
    _, _, pi1, pi0 = counterfactuals(X, b)
    preds = {1: pi1, 0: pi0}
    n1 = int(np.sum(z == 1))
    n0 = n - n1
    theta = {1: n1 / n, 0: n0 / n}

    def var_j(j):
        arm = z == j
        sv = np.var(y[arm] - preds[j][arm], ddof=1)
        sc = np.cov(y[arm], preds[j][arm], ddof=1)[0, 1]
        sv_all = np.var(preds[j], ddof=1)
        return (sv / theta[j] + 2 * sc - sv_all) / n

    sc0 = np.cov(y[z == 0], pi1[z == 0], ddof=1)[0, 1]
    sc1 = np.cov(y[z == 1], pi0[z == 1], ddof=1)[0, 1]
    sc_all = np.cov(pi0, pi1, ddof=1)[0, 1]
    cov01 = (sc0 + sc1 - sc_all) / n
    return float(var_j(1) - 2 * cov01 + var_j(0))


def freeze_dataset(tag, y, z, covs, cov_names):
    n = len(y)
    X = np.column_stack([np.ones(n), z] + covs)
    p = X.shape[1]
    b, pi, resid, hat, vmodel, _ = reference_fit(y, X)

    glm = {
        "n": n,
        "p": p,
        "coefficients": b.tolist(),
        "model_covariance": vmodel.tolist(),
        "fitted": pi.tolist(),
        "residuals": resid.tolist(),
        "hat": hat.tolist(),
    }
    with open(os.path.join(OUT, f"{tag}_glm_expected.json"), "w") as f:
        json.dump(glm, f, indent=1)

    kinds = ["const", "HC0", "HC1", "HC2", "HC3", "HC4", "HC4m", "HC5"]
    sw = {}
    for kind in kinds:
        omega = hc_weights(resid, hat, n, p, kind)
        sw[kind] = {
            "weights": omega.tolist(),
            "covariance": sandwich(X, vmodel, omega).tolist(),
        }
    with open(os.path.join(OUT, f"{tag}_sandwich_expected.json"), "w") as f:
        json.dump(sw, f, indent=1)

    _, _, pi1, pi0 = counterfactuals(X, b)
    rd = float(np.mean(pi1) - np.mean(pi0))
    sigma2_rd = float(np.var(pi1 - pi0, ddof=1))
    g1, g0 = ame_gradients_numeric(X, b)
    g = g1 - g0
    var_m1 = float(g @ vmodel @ g)
    var_delta = {}
    var_proposed = {}
    for kind in kinds:
        omega = hc_weights(resid, hat, n, p, kind)
        v = sandwich(X, vmodel, omega)
        var_delta[kind] = float(g @ v @ g)
        var_proposed[kind] = var_delta[kind] + sigma2_rd / n
    eif, eif_mean = eif_variance(X, b, y)
    semi = semiparam_variance(X, b, y, z)

    marg = {
        "rd": rd,
        "pi_bar1": float(np.mean(pi1)),
        "pi_bar0": float(np.mean(pi0)),
        "sigma2_rd": sigma2_rd,
        "var_delta_model": var_m1,
        "var_proposed_model": var_m1 + sigma2_rd / n,
        "var_delta_hc": var_delta,
        "var_proposed_hc": var_proposed,
        "var_eif": eif,
        "eif_mean": eif_mean,
        "var_semiparametric": semi,
    }
    with open(os.path.join(OUT, f"{tag}_effects_expected.json"), "w") as f:
        json.dump(marg, f, indent=1)


def main():
    os.makedirs(OUT, exist_ok=True)

    # --- 200-subject dataset, ~1:1 allocation ---
    rng = np.random.default_rng(20240817)
    n = 200
    x1 = rng.standard_normal(n)
    x2 = (rng.random(n) < 0.5).astype(float)
    z = np.zeros(n)
    z[rng.permutation(n)[: n // 2]] = 1.0
    eta = -0.8 + 0.6 * z + 0.9 * x1 - 0.7 * x2
    y = (rng.random(n) < invlogit(eta)).astype(float)
    write_csv(os.path.join(OUT, "glm200.csv"), y, z, [x1, x2], ["x1", "x2"])
    freeze_dataset("glm200", y, z, [x1, x2], ["x1", "x2"])

    # --- 201-subject dataset, exact 2:1 allocation ---
    rng = np.random.default_rng(31415926)
    n = 201
    x1 = rng.standard_normal(n)
    x2 = (rng.random(n) < 0.5).astype(float)
    z = np.zeros(n)
    z[rng.permutation(n)[:134]] = 1.0
    eta = -0.5 + 0.4 * z + 0.8 * x1 + 0.5 * x2
    y = (rng.random(n) < invlogit(eta)).astype(float)
    write_csv(os.path.join(OUT, "glm201_21.csv"), y, z, [x1, x2], ["x1", "x2"])
    freeze_dataset("glm201_21", y, z, [x1, x2], ["x1", "x2"])

    # --- 6-subject toy dataset, one covariate ---
    y6 = np.array([0.0, 1.0, 1.0, 0.0, 1.0, 0.0])
    z6 = np.array([0.0, 1.0, 0.0, 1.0, 1.0, 0.0])
    x6 = np.array([0.5, -1.25, 2.0, 0.75, -0.5, 1.5])
    write_csv(os.path.join(OUT, "toy6.csv"), y6, z6, [x6], ["x"])
    X6 = np.column_stack([np.ones(6), z6, x6])
    b6, pi6, _, _, _, _ = reference_fit(y6, X6)
    _, _, p61, p60 = counterfactuals(X6, b6)
    with open(os.path.join(OUT, "toy6_expected.json"), "w") as f:
        json.dump(
            {
                "coefficients": b6.tolist(),
                "pi_bar1": float(np.mean(p61)),
                "pi_bar0": float(np.mean(p60)),
                "rd": float(np.mean(p61) - np.mean(p60)),
            },
            f,
            indent=1,
        )

    print("fixtures written to", OUT)


if __name__ == "__main__":
    main()
