"""Ancestral lines and the meeting phase transition.

Two lines started k apart meet with probability tending to 1 when alpha > 1/2
and to a limit below 1 when alpha < 1/2.
"""
from fracwalk.ancestry import component_counts, meeting_scan
from fracwalk.laws import make_tail_law

for alpha in (0.75, 0.25):
    law = make_tail_law(alpha)
    for est in meeting_scan(law, 1, [10 ** 2, 10 ** 4, 10 ** 6], 20_000, seed=2):
        print(f"alpha={alpha}  depth={est.depth:>8d}  P(meet) = {est.estimate:.4f} +- {est.ci:.4f}")

counts = component_counts(make_tail_law(0.25), 1000, 8000, 50, seed=3)
print("alpha=0.25, n=1000: mean number of components", counts[:, 0].mean())
