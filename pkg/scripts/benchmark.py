"""Time network versus closed-form inference.

usage: python scripts/benchmark.py [--run runs/treloar] [--replicates 20]

With --run, the checkpoint and selected expressions of a finished pipeline run
are timed. Without it, a briefly trained network on the bundled data is timed
against the fixture Treloar equation pair (timing does not depend on fit quality).
"""

import argparse
from pathlib import Path

from pnamsr import pipeline
from pnamsr.bench import benchmark_inference
from pnamsr.config import RunConfig
from pnamsr.dataio import bundled_dataset, load_dataset
from pnamsr.fixtures import treloar_pair
from pnamsr.training import TrainConfig, init_model, train


def standalone():
    data = load_dataset(bundled_dataset())
    tc = TrainConfig(epochs=500, stress_scale=0.05)
    model, _ = train(init_model(data, tc), data, tc)
    return model, treloar_pair()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--run", default=None, help="pipeline output directory")
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if args.run:
        cfg = RunConfig(out_dir=args.run)
        ckpt, _ = pipeline.load_run(Path(args.run), cfg)
        model, pair = ckpt.model, pipeline.read_distilled(Path(args.run), cfg, ckpt.model).pair
    else:
        model, pair = standalone()
    table = benchmark_inference(model, pair, (100, 1000, 10000, 100000), args.replicates, args.seed)
    print("\n".join(table.markdown()))


if __name__ == "__main__":
    main()
