"""Every implication between the stability notions, checked on the catalogue.

For each built-in system the table lists the gain brackets of the system
and of its dual at p = 1 and p = inf, the pairing residual and how many
implications were exercised. The second table is the negative cell: the
left shift keeps L^1 gain 1 while its L^inf gain diverges under grid
refinement.
"""

import sys

from bibolilo.duality import catalogue, figure_one_markdown, refinement_cells, sweep_figure_one

M = int(sys.argv[1]) if len(sys.argv) > 1 else 16
reports = sweep_figure_one(catalogue(M), trials=50)
cells = refinement_cells([M // 2, M, 2 * M])
print(figure_one_markdown(reports, cells))
failed = [v.name for r in reports for v in r.verdicts if not v.passed] + [v.name for v in cells if not v.passed]
print("all implications hold" if not failed else f"failed: {failed}")
