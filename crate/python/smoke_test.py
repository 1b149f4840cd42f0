"""Smoke test for the pygapprob extension module."""

import math

import pygapprob as g


def main():
    p = g.gap_probability(0.0, 1, 0, "-inf,0")
    assert abs(p - 0.5) < 1e-12, p

    p = g.gap_probability(1.0, 1, 1, "-2,2", digits=30)
    mc = g.mc_gap_probability(1.0, 1, 1, "-2,2", samples=50_000, seed=3)
    assert abs(mc["p_hat"] - p) < 4 * mc["std_err"], (p, mc)

    gamma_quarter = math.gamma(0.25)
    assert abs(g.pearcey_p(0.0, 0.0) - gamma_quarter / (math.pi * 4 ** 0.75)) < 1e-10
    assert abs(g.pearcey_q(0.0, 0.0, 1) - 1 / math.sqrt(math.pi)) < 1e-10

    q40 = g.pearcey_log_det(0.0, "-1,1", order=40)
    q80 = g.pearcey_log_det(0.0, "-1,1", order=80)
    assert q40 < 0 and abs(q40 - q80) < 1e-10, (q40, q80)

    r = g.check_identity("vir_t2", 1.0, 1, 1, "-1.5,1.5", digits=30)
    assert r["residual"] < 1e-6, r

    r = g.pearcey_pde_residual(0.0, "-1,1.3", form="corrected", chart="orbit")
    assert r["relative_residual"] < 1e-3, r

    u, v = g.brownian_map(0.3, 1.0, "-1,1")
    assert u > 0 and v.startswith("-")

    try:
        g.gap_probability(0.0, 1, 1, "-2,2")
    except ValueError:
        pass
    else:
        raise AssertionError("a = 0 with k1 k2 > 0 must be rejected")

    print("pygapprob smoke test passed:", len(g.IDENTITIES), "identities,", f"P={p:.12f}", f"Q={q80:.12f}")


if __name__ == "__main__":
    main()
