"""The operator algebra and its two exact collapse identities.

The n-summand expansion is driven by constant-coefficient differential
operators built from moment differences.  Two structurally different
constructions must coincide exactly, coefficient by coefficient:

  * the summand-indexed operators equal a Q-weighted combination of the
    i-fold product operators:  psi^(k)_t = sum_i Q_{i-1}(k) A^i_t,
  * their partial sums collapse to P-weighted combinations:
    T^n_t = sum_{k<=n} psi^(k)_t = sum_i P_i(n) A^i_t.

On a rational moment fixture everything is a Fraction, so "equal" below
means exact dictionary equality of the operators, not closeness.
"""

from edgeworth import (
    DiffOperator,
    a_op,
    fixture_table,
    p_value,
    psi_k_op,
    psi_op,
    q_value,
    t_op,
)

table = fixture_table(2, 9)  # 2-D rational moment differences

print("Basic operator of order 4 on the 2-D fixture:")
for key, coeff in psi_op(table, 4).items():
    print(f"  d{list(key)} * {coeff}")

print("\nThe i-fold products vanish below order 3i:")
print("  A^2_5 == 0:", a_op(table, 2, 5).is_zero())
print("  A^2_6 terms:", len(a_op(table, 2, 6).terms))

print("\nCollapse identity at (k, t) = (7, 9):")
lhs = psi_k_op(table, 7, 9)
rhs = DiffOperator.zero(2)
for i in (1, 2, 3):
    rhs = rhs + q_value(i - 1, 7) * a_op(table, i, 9)
print("  psi^(7)_9 == Q_0(7) A^1_9 + Q_1(7) A^2_9 + Q_2(7) A^3_9:", lhs == rhs)
print("  Q values:", [str(q_value(i, 7)) for i in (0, 1, 2)])

print("\nPartial-sum identity at (n, t) = (12, 9):")
summed = t_op(table, 12, 9, "sum")       # literally adds psi^(1..12)_9
direct = t_op(table, 12, 9, "direct")    # P_i(12)-weighted products
print("  sum-of-psi^(k) == P-weighted form:", summed == direct)
print("  P_i(12):", [str(p_value(i, 12)) for i in (1, 2, 3)])

print("\nBoth A^i_t constructions agree (recursion vs direct coefficients):")
ok = all(
    a_op(table, i, t, "recursive") == a_op(table, i, t, "direct")
    for i in (1, 2, 3)
    for t in range(10)
)
print("  recursive == direct for i <= 3, t <= 9:", ok)
