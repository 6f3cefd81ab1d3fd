"""Print the exact critical exponents p(n, k) and the bound ranges for n <= N."""
import sys

from oscillab.explab.experiments import exponent_records

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 8
print(f"{'n':>3} {'k':>3} {'p_critical':>14} {'float':>10} {'range':>20}")
for rec in exponent_records(n_max):
    rng = f"({rec['range_low']:.4f}, {rec['range_high']:.4f})"
    print(f"{rec['n']:>3} {rec['k']:>3} {rec['p_critical']:>14} {rec['p_critical_float']:>10.6f} {rng:>20}")
