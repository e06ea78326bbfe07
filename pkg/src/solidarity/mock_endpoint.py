"""Scripted external-model endpoint for protocol tests and demos.

Reads NDJSON requests {"id", "text"} on stdin and answers {"id", "scores"}
on stdout. Scores are a deterministic function of the text, so two runs give
identical answers. Run as: python -m solidarity.mock_endpoint
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys


def scores_for(text: str) -> dict[str, float]:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=6).digest()
    raw = [1 + digest[0], 1 + digest[1], 1 + digest[2]]
    total = sum(raw)
    return {"S": raw[0] / total, "A": raw[1] / total, "O": raw[2] / total}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--jitter",
        type=float,
        default=0.0,
        help="add this amount to the S score so the sum is off by a known margin",
    )
    args = parser.parse_args(argv)

    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        scores = scores_for(req["text"])
        if args.jitter:
            scores["S"] += args.jitter
        sys.stdout.write(json.dumps({"id": req["id"], "scores": scores}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
