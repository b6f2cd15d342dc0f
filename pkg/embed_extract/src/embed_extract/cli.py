"""Command line front end.

    extract --in prompts.txt --model hash:256 --out features.txt

Exit codes: 0 success, 2 usage error, 3 corpus error, 4 encoder or
encoding failure.
"""

from __future__ import annotations

import argparse
import sys

from .corpus import CorpusError
from .encoders import EncoderError
from .extract import EncodingMismatch, extract


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="extract",
        description="Encode a prompt file (one prompt per line) into a lepl feature file.",
    )
    p.add_argument("--in", dest="corpus", required=True, metavar="TXT",
                   help="input corpus, one UTF-8 prompt per line")
    p.add_argument("--model", required=True, metavar="NAME",
                   help="encoder: hash:<dim> or a sentence-transformers model name/path")
    p.add_argument("--out", required=True, metavar="FILE",
                   help="feature file to write")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = extract(args.corpus, args.model, args.out)
    except FileNotFoundError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 3
    except CorpusError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 3
    except EncoderError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 4
    except EncodingMismatch as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 4
    print(f"extract ok n={result.n} d={result.d} model={result.encoder} out={result.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
