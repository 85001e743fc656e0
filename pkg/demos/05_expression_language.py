"""The scenario expression language.

Scenario files define f(x), g(x), r(t) and fault signals as text
expressions over t and x1..xn, so new systems need no code changes.
This walks through parsing, evaluation, printing, domain checking and
the error reporting (every parse error carries a byte offset).
"""

import ftcsim as F
from ftcsim.exprlang import DomainError, ExprError

print("== the stock scenario's nonlinearities")
g = F.parse("0.5*sin(t)+4", 3)
f = F.parse("0.05*sin(x3)", 3)
print("g at t=0:        ", F.evaluate(g, 0.0, [0, 0, 0]))
print("g at t=pi/2:     ", F.evaluate(g, 1.5707963267948966, [0, 0, 0]))
print("f at x3=pi/2:    ", F.evaluate(f, 0.0, [0, 0, 1.5707963267948966]))

print("\n== precedence is the usual one; unary minus binds below ^")
for src in ("2*-3+1", "-2^2", "(-2)^2", "2^3^2"):
    print(f"  {src:<10s} = {F.evaluate(F.parse(src, 0), 0.0, [])}")

print("\n== step is right-continuous: active at the event instant")
step = F.parse("step(t-15)", 0)
for t in (14.999, 15.0, 15.001):
    print(f"  step(t-15) at t={t}: {F.evaluate(step, t, [])}")

print("\n== printing round-trips to the identical tree")
e = F.parse("-(x1 - x2)/(x3 + 1)^2", 3)
printed = F.format_expr(e)
print("  printed:", printed)
print("  reparses identically:", F.parse(printed, 3).node == e.node)

print("\n== domain violations are reported, never silent infinities")
for src in ("log(t-2)", "1/(t-1)", "(-2)^0.5"):
    try:
        F.evaluate(F.parse(src, 0), 1.0, [])
        print(f"  {src}: ok")
    except DomainError as exc:
        print(f"  {src}: DomainError: {exc}")

print("\n== parse errors carry byte offsets")
for src in ("0.5*sin(x9)", "2 ** 3", "min(1)"):
    try:
        F.parse(src, 3)
    except ExprError as exc:
        print(f"  {src!r}")
        print(f"   {' ' * exc.offset}^ {type(exc).__name__}: {exc.message}")
