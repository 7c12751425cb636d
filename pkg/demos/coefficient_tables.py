"""Walk through the exact coefficient tables behind the expansion.

Everything printed here is an exact rational: the Bernoulli numbers (in
the convention with B_1 = +1/2), the Faulhaber rows expressing
sum_{k<n} k^l as a polynomial in n, the P_i polynomials that count
iterated summand contributions, and finally the corrector polynomials
K_1..K_3 for three standardized laws, which reproduce the classical
one-dimensional Edgeworth coefficients.
"""

from edgeworth import (
    MomentTable,
    a_coeffs,
    b_coeffs,
    bernoulli,
    k_poly,
    make_distribution,
    p_value,
)


def show_poly(p):
    bits = []
    for e, c in sorted(p.terms.items()):
        deg = e[0]
        mono = "1" if deg == 0 else ("x" if deg == 1 else f"x^{deg}")
        bits.append(f"({c})*{mono}")
    return " + ".join(bits) if bits else "0"


print("Bernoulli numbers B_0..B_10 (second convention):")
print("  ", [str(bernoulli(m)) for m in range(11)])

print("\nPower-sum rows b[l]: sum_{k=1}^{n-1} k^l = sum_q b[l][q] n^q")
for l in range(4):
    print(f"  l={l}: ", [str(c) for c in b_coeffs(l)])

print("\nPolynomials P_i(n) (vanish for n < i):")
for i in range(1, 5):
    vals = [str(p_value(i, n)) for n in range(1, 8)]
    print(f"  P_{i}(1..7) = {vals}   coefficients {[str(c) for c in a_coeffs(i)]}")

print("\nCorrector polynomials for three standardized laws")
print("(the H_3/H_4/H_6... combinations of the classical 1-D expansion):")
for name in ("exponential", "uniform", "laplace"):
    table = MomentTable.from_distribution(make_distribution(name), 9)
    print(f"\n  {name}: ell_3={table.ell(3)}, ell_4={table.ell(4)}, ell_5={table.ell(5)}")
    for m in (1, 2, 3):
        print(f"    K_{m}(x) = {show_poly(k_poly(table, m))}")

print("\nA fourth-moment-matched check: the uniform law has ell_3 = 0, so its")
print("first corrector vanishes identically and the plain Gaussian already")
print("approximates at the faster rate (see demos/convergence_rates.py).")
