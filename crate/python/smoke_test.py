"""Smoke test for the phaselab Python bindings.

Build first:  pip install ./crates/py   (or `maturin develop -m crates/py/Cargo.toml`)
"""

import math

import phaselab_py as pl


def main():
    inst = pl.Instance("fourier", 256, 0.5, 0.2, seed=7)
    assert (inst.N, inst.n, inst.k) == (256, 128, 26), inst
    assert len(inst.x_true) == 256 and len(inst.b) == 128

    res = pl.solve(inst, variant="relaxed")
    assert res.status == "success", res
    assert res.rrmse < 1e-4 and res.converged

    hard = pl.solve(pl.Instance("gaussian", 64, 0.5, 0.9, seed=1), indirect=True)
    assert hard.status != "success", hard
    assert hard.objective == "real-l1"

    z = pl.soft_threshold(3 + 4j, 1.0)
    assert abs(z - (3 + 4j) * 0.8) < 1e-12

    assert abs(pl.transition("real-l1", 0.5) - 0.38569) < 1e-5
    assert abs(pl.transition("complex-l1", 0.5) - 0.45789) < 1e-5
    pts = pl.curve("complex-l1", [0.25, 0.5, 0.75])
    assert all(a[1] < b[1] for a, b in zip(pts, pts[1:]))

    rhos = [0.30 + 0.01 * i for i in range(31)]
    succ = [round(20 / (1 + math.exp(80 * (r - 0.45)))) for r in rhos]
    rho50, slope, _, separated = pl.fit_counts(0.5, rhos, succ, [20] * len(rhos))
    assert abs(rho50 - 0.45) < 0.01 and slope < 0 and not separated

    try:
        pl.Instance("fourier", 64, 1.5, 0.2, seed=0)
    except ValueError:
        pass
    else:
        raise AssertionError("delta=1.5 accepted")

    print("python smoke test passed:", res)


if __name__ == "__main__":
    main()
