# cli/generate_graph.py

import argparse
import sys
from typing import Optional, Sequence

from dggkit.graph_core import GraphError, generate, save_graph


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="generate_graph",
        description="Write a generated graph (path:N, star:k,n, lattice:dim,R, tree:degree,R) as a graph file.",
    )
    parser.add_argument("spec", help="generator spec, e.g. path:21")
    parser.add_argument("--m-mode", choices=["unit", "degree"], default="unit")
    parser.add_argument("--out", help="output file (default: stdout)")
    args = parser.parse_args(argv)

    try:
        g = generate(args.spec, m_mode=args.m_mode)
    except (GraphError, ValueError) as exc:
        print(f"generate_graph: error: {exc}", file=sys.stderr)
        return 2

    document = save_graph(g)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(document)
        print(f"Wrote {args.out} ({len(g)} vertices, {len(g.edges)} edges)", file=sys.stderr)
    else:
        sys.stdout.write(document.decode("utf-8") + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
