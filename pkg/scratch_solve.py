import time

from exitmoment.augment import SdeModel, augment, moment_unscale_factor, scale_model
from exitmoment.momentproblem import assemble
from exitmoment.conic import SolverSettings, solve

bm = augment(SdeModel.from_strings(
    ["y"], ["0"], [["1"]], [0.5], 10.0, ["y", "1 - y"]))
model = scale_model(bm)

analytic = {1: 0.25, 2: 0.10417, 3: 0.06354, 4: 0.05153, 5: 0.05221, 6: 0.06348}

for variant, K_list in (("reduced", (8, 14)), ("original", (8,))):
    for K in K_list:
        print(f"=== {variant} K={K}")
        for order in range(1, 7):
            row = []
            for sense in ("min", "max"):
                prog = assemble(model, variant, K, order, sense)
                t = time.time()
                res = solve(prog, SolverSettings(max_iters=200000))
                bound = res.objective * moment_unscale_factor(model, order)
                row.append((bound, res.status[:3], res.iterations, time.time() - t))
            (lo, st1, it1, t1), (hi, st2, it2, t2) = row
            print(f"order {order}: [{lo:.5f}, {hi:.5f}] vs {analytic[order]:.5f} "
                  f"({st1} {it1} {t1:.0f}s / {st2} {it2} {t2:.0f}s)", flush=True)

print("=== K monotonicity (reduced, order 1)")
for K in (4, 6, 8):
    lo = solve(assemble(model, "reduced", K, 1, "min"), SolverSettings()).objective
    hi = solve(assemble(model, "reduced", K, 1, "max"), SolverSettings()).objective
    print(f"K={K}: [{lo:.6f}, {hi:.6f}]", flush=True)
