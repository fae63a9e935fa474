"""Escape from basins of decreasing width.

Three double-well landscapes share the same noise amplitude, calibrated so
the widest basin empties quickly.  Escape becomes rarer and slower as the
basin narrows.  Trial count is reduced here; presets/fig3_basins.cfg holds
the full configuration.
"""

from levyescape import escape


def main():
    noise = 1.58e-4
    print("sharpness a    escape prob    mean exit steps")
    for a in (1e5, 500, 150):
        cfg = escape.double_well_config(a, noise, trials=300, max_steps=2000,
                                        base_seed=700000, gamma=2.0)
        stats = escape.run_escape_experiment(cfg)
        print(f"{a:<14g} {stats.escape_prob:<14.3f} "
              f"{stats.mean_exit_steps:.1f}")


if __name__ == "__main__":
    main()
