#!/usr/bin/env python3
"""Builds an English text corpus from locally installed documentation.

Sources, in order, until --min-bytes of text is collected:
  1. docstrings from installed Python packages and the standard library
  2. plain-text files under /usr/share/doc (changelogs, READMEs)

Output is NDJSON, one {"id", "text"} document per module or doc file, with
deterministic ids and ordering so corpus splits are reproducible.
"""
import argparse
import ast
import gzip
import hashlib
import json
import os
import sys

PY_ROOTS = [
    "/usr/local/lib/python3.10/dist-packages",
    "/usr/lib/python3.10",
    "/usr/lib/python3",
]
DOC_ROOT = "/usr/share/doc"
MIN_DOC_CHARS = 200


def iter_py_files(root):
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d != "__pycache__")
        for f in sorted(filenames):
            if f.endswith(".py"):
                yield os.path.join(dirpath, f)


def module_docstrings(path):
    try:
        src = open(path, encoding="utf-8", errors="ignore").read()
    except OSError:
        return ""
    if len(src) > 2_000_000:
        return ""
    try:
        tree = ast.parse(src)
    except (SyntaxError, ValueError, RecursionError, MemoryError):
        return ""
    parts = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            d = ast.get_docstring(node)
            if d and len(d) >= 40:
                parts.append(d.strip())
    return "\n\n".join(parts)


def iter_doc_files(root):
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(dirnames)
        for f in sorted(filenames):
            lower = f.lower()
            if any(k in lower for k in ("changelog", "readme", "news", "copyright")):
                yield os.path.join(dirpath, f)


def read_doc_file(path):
    try:
        if path.endswith(".gz"):
            with gzip.open(path, "rt", encoding="utf-8", errors="ignore") as fh:
                return fh.read(1_000_000)
        with open(path, encoding="utf-8", errors="ignore") as fh:
            return fh.read(1_000_000)
    except OSError:
        return ""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--output", required=True)
    ap.add_argument("--min-bytes", type=int, default=52_428_800)
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    if not args.force and os.path.isfile(args.output):
        have = sum(len(json.loads(l)["text"].encode()) for l in open(args.output, encoding="utf-8"))
        if have >= args.min_bytes:
            print(f"reusing {args.output} ({have} text bytes)")
            return 0

    seen = set()
    collected = 0
    docs = 0
    with open(args.output, "w", encoding="utf-8") as out:

        def emit(doc_id, text):
            nonlocal collected, docs
            if len(text) < MIN_DOC_CHARS:
                return
            digest = hashlib.sha1(text.encode()).digest()
            if digest in seen:
                return
            seen.add(digest)
            out.write(json.dumps({"id": doc_id, "text": text}, ensure_ascii=False) + "\n")
            collected += len(text.encode())
            docs += 1

        for root in PY_ROOTS:
            if collected >= args.min_bytes:
                break
            if not os.path.isdir(root):
                continue
            for path in iter_py_files(root):
                emit("py:" + os.path.relpath(path, root), module_docstrings(path))
                if collected >= args.min_bytes:
                    break

        if collected < args.min_bytes and os.path.isdir(DOC_ROOT):
            for path in iter_doc_files(DOC_ROOT):
                emit("doc:" + os.path.relpath(path, DOC_ROOT), read_doc_file(path))
                if collected >= args.min_bytes:
                    break

    print(f"wrote {docs} docs, {collected} text bytes -> {args.output}")
    if collected < args.min_bytes:
        print("insufficient local text", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
