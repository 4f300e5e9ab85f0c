"""Thresholds across densities: where detection becomes possible, where the
two bounds certify each other, and where a hard phase opens.

Run: python demos/03_phase_diagram.py   (about a minute on one core)
"""

from rankone.phase import find_rho_star, phase_diagram


def main():
    grid = [0.02, 0.05, 0.08, 0.1, 0.2, 0.4, 0.6, 0.7, 1.0]
    diagram = phase_diagram(grid)
    print("rho    algo      detect    match     match_everywhere")
    for r in diagram.rows:
        print(f"{r.rho:.2f}  {r.delta_algo:.6f}  {r.delta_detect:.6f}  {r.delta_match:.6f}  {r.match_everywhere}")
    print(f"hard phase opens below rho_star = {find_rho_star().value:.4f}")
    problems = diagram.check_invariants()
    print("orderings consistent" if not problems else "\n".join(problems))


if __name__ == "__main__":
    main()
