#!/usr/bin/env python3
"""Convert an upstream NAS-Bench-201 / NATS-Bench topology dump to the
JSON-lines ingest format read by `nas ingest` and $NB201_TABLE.

Needs either `nas_201_api` (NAS-Bench-201-v1_0/v1_1 .pth) or `nats_bench`
(NATS-tss-v1_0-3ffb9-simple directory) installed.

    python3 tools/convert_nb201.py NAS-Bench-201-v1_1-096897.pth nb201.jsonl

CIFAR-10 validation accuracy comes from the train/valid split
("cifar10-valid"), test accuracy from the train+valid split ("cifar10"),
which is the usual convention for reporting this benchmark. CIFAR-100 and
ImageNet16-120 use the x-valid / x-test halves of their test sets.
"""

import argparse
import json
import sys


def open_api(path):
    try:
        from nats_bench import create

        return create(path, "tss", fast_mode=True, verbose=False)
    except ImportError:
        pass
    try:
        from nas_201_api import NASBench201API

        return NASBench201API(path, verbose=False)
    except ImportError:
        sys.exit("install nats_bench or nas_201_api to read the upstream dump")


def accuracies(api, index, hp):
    def info(dataset):
        return api.get_more_info(index, dataset, hp=hp, is_random=False)

    c10v = info("cifar10-valid")
    c10 = info("cifar10")
    c100 = info("cifar100")
    img = info("ImageNet16-120")
    return {
        "cifar10": {"valid": c10v["valid-accuracy"], "test": c10["test-accuracy"]},
        "cifar100": {"valid": c100["valid-accuracy"], "test": c100["test-accuracy"]},
        "imagenet16_120": {"valid": img["valid-accuracy"], "test": img["test-accuracy"]},
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("dump", help="upstream .pth file or NATS-Bench directory")
    p.add_argument("out", help="output .jsonl path")
    p.add_argument("--hp", default="200", help="training schedule to read (default 200 epochs)")
    args = p.parse_args()

    api = open_api(args.dump)
    n = len(api)
    with open(args.out, "w") as f:
        for i in range(n):
            row = {"arch": api.arch(i)}
            row.update(accuracies(api, i, args.hp))
            f.write(json.dumps(row, separators=(",", ":")) + "\n")
            if (i + 1) % 1000 == 0:
                print(f"{i + 1}/{n}", file=sys.stderr)
    print(f"wrote {n} rows to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
