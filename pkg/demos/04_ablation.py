"""Run the five settings on shared folds and print the comparison table.

Settings 1-3 use the untuned network, 4 the grid-searched parameters and 5
the GA individual.  Feature counts are shrunk to fit the small corpus.
Run with ``python demos/04_ablation.py`` (seconds on one core).
"""
from ticketclf.evaluation import format_reports, run_ablation, setting
from ticketclf.synthetic import make_trigram_corpus

corpus = make_trigram_corpus(200, seed=0)
settings = [setting(i, individual=(400, (15, 9, 10)), n_features=400) for i in range(1, 6)]
reports = run_ablation(corpus, k=5, seed=0, settings=settings, per_project=False)

for line in format_reports(reports).splitlines():
    if line.startswith("setting") or "\tf1\t" in line:
        print(line)
