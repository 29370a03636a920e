"""Regenerates maxnorm_cases.inc: random Z (up to 4 x 3) with max-norms from an
interior-point solve of the completion SDP, plus a level t for the
feasibility comparison."""
import warnings

import cvxpy as cp
import numpy as np

warnings.filterwarnings("ignore")


def max_norm(z):
    m, n = z.shape
    x = cp.Variable((m + n, m + n), PSD=True)
    t = cp.Variable()
    prob = cp.Problem(cp.Minimize(t), [x[:m, m:] == z, cp.diag(x) <= t])
    prob.solve(solver="CLARABEL", tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
    return float(t.value)


def main():
    rng = np.random.default_rng(20240611)
    rows = []
    for _ in range(200):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        z = np.round(rng.standard_normal((m, n)), 6)
        ref = max_norm(z)
        t = round(ref * rng.uniform(0.7, 1.3), 6)
        entries = ", ".join(repr(float(v)) for v in z.flatten())
        rows.append(f"    {{{m}, {n}, {{{entries}}}, {ref:.10f}, {t}}},")
    with open("maxnorm_cases.inc", "w") as f:
        f.write("// generated by gen_maxnorm_cases.py\n")
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
