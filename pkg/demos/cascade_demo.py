"""The unforced doubling cascade: superstable and doubling parameters.

Computes s_n (critical point periodic with period 2^n) and d_n (cycle
multiplier crossing -1), prints both gap-ratio sequences converging to the
universal constant 4.66920..., and the accumulation point of the cascade.
"""

from qpcascade import (
    FEIGENBAUM_DELTA,
    accumulation_alpha,
    cascade_table,
    feigenbaum_ratios,
)

table = cascade_table(8)

print(f"{'n':>2} {'s_n':>18} {'d_n':>18}")
for n, s, d in table.entries:
    print(f"{n:>2} {s:>18.13f} {d:>18.13f}")

print("\ngap ratios (s_n):", " ".join(f"{r:.5f}" for r in table.ratios_s))
print("gap ratios (d_n):", " ".join(f"{r:.5f}" for r in table.ratios_d))
print(f"\nuniversal limit:   {FEIGENBAUM_DELTA:.9f}")
print(f"last s-ratio:      {table.ratios_s[-1]:.9f}")
print(f"accumulation s*:   {accumulation_alpha(table.s_values):.10f}")

# a synthetic exactly-geometric sequence gives its ratio back exactly
synthetic = [1 - 5.0 ** (-n) for n in range(7)]
print("\nsanity (geometric with ratio 5):",
      " ".join(f"{r:.3f}" for r in feigenbaum_ratios(synthetic)))
