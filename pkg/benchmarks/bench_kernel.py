"""Compare the compiled and pure-Python normal-form kernels.

Runs each workload in a fresh subprocess (the backend is chosen at import
time via APPROXLAWS_PURE) and reports wall time per backend:

    python benchmarks/bench_kernel.py
"""

import json
import os
import subprocess
import sys
import time

WORKLOADS = ["poly_mul", "determining_system", "reconstruct", "verify_corpus"]

KDV = """
independent = t, x
dependent = u
order = 1
equation = u_t + u*u_x + u_xxx - eps*u_xx
leading = u_t
"""


def run_workload(name: str) -> float:
    import approxlaws
    from approxlaws import corpus
    from approxlaws.multipliers import AnsatzSpec, MultiplierSet, solve_multipliers
    from approxlaws.fluxes import reconstruct
    from approxlaws.problem import parse_problem_text
    from approxlaws.verify import verify_identity

    pb = parse_problem_text(KDV).problem
    tab = pb.table

    if name == "poly_mul":
        from approxlaws import kernel
        from approxlaws.expr import as_poly, pow_int
        from approxlaws.parser import parse
        base = as_poly(pow_int(parse("1 + t + x + u[0] + u[0]_x + u[0]_xx + u[1]", tab), 4))
        t0 = time.perf_counter()
        for _ in range(12):
            kernel.poly_mul(base, base)
        return time.perf_counter() - t0

    if name == "determining_system":
        spec = AnsatzSpec(
            (tab.indep[0], tab.indep[1], tab.jet("u", 0), tab.jet("u", 0, ("x",)), tab.jet("u", 0, ("x", "x"))),
            3,
        )
        t0 = time.perf_counter()
        solve_multipliers(pb, spec, "consistent")
        return time.perf_counter() - t0

    if name == "reconstruct":
        from approxlaws.parser import parse
        from approxlaws.expr import normalize
        m = MultiplierSet(
            "consistent",
            ((normalize(parse("t*u[0] - x", tab)),
              normalize(parse("2*t^2*u[0]_xx + (t*u[0]-x)^2 + t*u[1]", tab))),),
        )
        t0 = time.perf_counter()
        reconstruct(pb, m)
        return time.perf_counter() - t0

    if name == "verify_corpus":
        entry = corpus.load("kaup-newell")
        t0 = time.perf_counter()
        for cl in entry.laws:
            verify_identity(entry.problem, cl.law)
        return time.perf_counter() - t0

    raise SystemExit(f"unknown workload {name}")


def main():
    if len(sys.argv) == 3 and sys.argv[1] == "worker":
        import approxlaws

        elapsed = run_workload(sys.argv[2])
        print(json.dumps({"backend": approxlaws.KERNEL_BACKEND, "seconds": elapsed}))
        return

    rows = []
    for name in WORKLOADS:
        times = {}
        for pure in (False, True):
            env = dict(os.environ)
            env.pop("APPROXLAWS_PURE", None)
            if pure:
                env["APPROXLAWS_PURE"] = "1"
            out = subprocess.run(
                [sys.executable, os.path.abspath(__file__), "worker", name],
                env=env, capture_output=True, text=True, check=True,
            )
            data = json.loads(out.stdout.strip().splitlines()[-1])
            times[data["backend"]] = data["seconds"]
        rows.append((name, times))
    print(f"{'workload':22s} {'python':>10s} {'c':>10s} {'speedup':>8s}")
    for name, times in rows:
        py = times.get("python", float("nan"))
        cc = times.get("c", float("nan"))
        ratio = py / cc if cc else float("nan")
        note = "" if "c" in times and "python" in times else "  (one backend only)"
        print(f"{name:22s} {py:10.3f} {cc:10.3f} {ratio:7.2f}x{note}")


if __name__ == "__main__":
    main()
