"""Monte Carlo strategy comparison under a noisy judge.

Synthetic pools where cluster size, when it carries signal at all, points
at the right answer.  Sweeping judge accuracy shows where each strategy
earns its keep: majority voting ignores the judge entirely, the unweighted
tournament trusts it completely, and the weighted tournament hedges between
the two signals.
"""

from sqlarena.report import SimulationConfig, simulate


def main() -> None:
    config = SimulationConfig(
        accuracies=(0.6, 0.7, 0.8, 0.9, 1.0),
        trials=2000,
        seed=1,
        strategies=("sc", "ct", "wct"),
    )
    rows = simulate(config)
    print(f"{'accuracy':>9} {'sc':>7} {'ct':>7} {'wct':>7}")
    by_accuracy: dict[float, dict[str, float]] = {}
    for row in rows:
        by_accuracy.setdefault(row.accuracy, {})[row.strategy] = row.mean_ex
    for accuracy in config.accuracies:
        cells = by_accuracy[accuracy]
        print(
            f"{accuracy:>9.1f} {cells['sc']:>7.2f} {cells['ct']:>7.2f} {cells['wct']:>7.2f}"
        )
    print()
    print("sc is flat (no judge in the loop); ct tracks judge accuracy; wct")
    print("dominates once the judge is meaningfully better than a coin flip.")


if __name__ == "__main__":
    main()
