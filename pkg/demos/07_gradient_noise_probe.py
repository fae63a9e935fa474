"""Measuring gradient-noise tails on a small classifier.

Trains a two-layer network with SGD, records minibatch gradient noise in
windows, and estimates the tail index of the pooled standardized noise.
Estimates below 2 indicate heavier-than-Gaussian tails.  Also runs the
preconditioner monitors for an Adam trajectory on a quadratic.
"""

import numpy as np

from levyescape import dynamics, landscapes, probe


def main():
    model = probe.MlpModel.random_init(seed=6)
    data = probe.SyntheticDataset.blobs(seed=7)
    cfg = dynamics.OptimizerConfig(kind="SGD", eta=0.05, alpha=1.5)
    records = probe.noise_trajectory(model, data, cfg, 300, window=16,
                                     batch_size=32, seed=11, record_stride=50)
    print("step   alpha_hat   |noise|")
    for r in records:
        a = f"{r.alpha_hat:.3f}" if r.alpha_hat is not None else "  n/a"
        print(f"{r.step:<6d} {a:<11} {r.noise_l2:.4f}")

    dense = probe.noise_trajectory(model, data, cfg, 300, window=16,
                                   batch_size=32, seed=11, record_stride=5)
    cmp = probe.averaging_tail_comparison(dense, beta1=0.5)
    print(f"raw vs momentum-averaged tail index: "
          f"{cmp['alpha_raw']:.3f} vs {cmp['alpha_avg']:.3f} "
          f"(decimation gap {cmp['decimation_gap']})")

    land = landscapes.QuadraticBasin(H=np.array([[1.0]]), center=np.zeros(1),
                                     height=10.0)
    adam = dynamics.OptimizerConfig(kind="ADAM", alpha=1.5, step_h=1e-2,
                                    beta1=0.9, beta2=0.99, noise_scale=0.0)
    rep = probe.assumption_monitors(land, adam, np.array([2.0]), 800,
                                    record_stride=10)
    print(f"monitor rho_t range [{float(np.min(rep.rho)):.3f}, "
          f"{float(np.max(rep.rho)):.3f}], second-moment extrema "
          f"[{rep.v_min:.3e}, {rep.v_max:.3e}]")


if __name__ == "__main__":
    main()
