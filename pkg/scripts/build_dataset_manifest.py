#!/usr/bin/env python3
"""Write manifest.json for a dataset directory: per-system description and
oracle-model statistics (sentences, words, classes, attributes, relationships).

Usage:
    python3 scripts/build_dataset_manifest.py data/systems
"""

import sys

from domaingen.evalharness import write_manifest

if __name__ == "__main__":
    if len(sys.argv) != 2:
        raise SystemExit(__doc__)
    print(write_manifest(sys.argv[1]))
