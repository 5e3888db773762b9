"""Which uncertainty quantifier should you ship?

No single number answers that: a quantifier can win at one false-positive
budget and lose at another. This evaluates several quantifiers at three
budgets, ranks them within each budget by combined score, and averages
the ranks, the same scheme the `uqsup compare` subcommand uses.
"""

from uqsup import calibrated_evaluation, gaussian_cluster_records, rank_order

d = gaussian_cluster_records(3000, classes=4, samples=16, noise=1.6, seed=11)
quantifiers = ("VR", "PE", "MI", "MS")
budgets = (0.01, 0.05, 0.1)

results = []
print("eps    " + "".join(f"  {q:>6}" for q in quantifiers) + "   (S1)")
for eps in budgets:
    row = []
    for q in quantifiers:
        report, _ = calibrated_evaluation(d, q, eps)
        s = report.s_beta[1.0]
        results.append((q, eps, s))
        row.append(s)
    print(f"{eps:.2f}   " + "".join(f"  {s:.4f}" for s in row))

table = rank_order(results)
print("\naverage rank over budgets (1 = best):")
for q in sorted(table.average_rank, key=table.average_rank.get):
    print(f"  {q:>3}  {table.average_rank[q]:.2f}  "
          f"(ranked in {table.counts[q]} of {len(table.groups)} groups)")
