"""Risk aversion and the optimal score: the corner effect.

Sweeps the mean-variance optimum over gamma for each climate baseline
and prints where the optimum sits. The sweep shows the model's most
interesting behavior: a risk-averse borrower prefers the zero-variance
corner e=1 once the risk penalty outweighs the effort cost, so the
optimal score can jump UP to 100 as gamma rises instead of drifting
down. The acceptance suite documents this as a failed monotonicity
property with the same numbers.

Run:  python3 demos/risk_aversion_sweep.py
"""

from eselend import CostModel, MarketParams, ScoreLink, optimal_ese_mv
from eselend.mean_variance import slope_for_baseline

params = MarketParams(p=1.0, y_high=1000.0, y_low=500.0, loan=100.0,
                      epsilon=0.05, delta=0.9)
cost = CostModel(c=1000.0)
w = 140.0
gammas = (0.0, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0)

print(f"Optimal score by risk aversion (fixed obligation w={w:g}, c=1000)")
header = "  ".join(f"g={g:<5g}" for g in gammas)
print(f"{'baseline':>9}  {header}")
for b in (0.3, 0.5, 0.7):
    link = ScoreLink(k=slope_for_baseline(b), b=b)
    cells = []
    for gamma in gammas:
        opt = optimal_ese_mv(w, params, gamma, cost, link)
        mark = "*" if opt.at_boundary else " "
        cells.append(f"{opt.score:6.2f}{mark}")
    print(f"{b:9.1f}  " + "  ".join(cells))

print()
print("* = optimum at the boundary of the score range.")
print("Reading a row left to right: the risk-neutral optimum is interior,")
print("but a small positive gamma already makes certain success (score 100,")
print("variance zero) worth more than saved effort cost. The score is not")
print("monotone in gamma; it leaps to the corner and stays there.")
