"""Hierarchical configuration datastore with atomic edits.

The tree is nested dicts with string leaves, YANG-ish but deliberately
schema-light: validation plugs in as callables so the radio emulator can
express rules like value ranges or "carrier activation requires sync lock"
without the datastore knowing about either. edit() is all-or-nothing; a
failed change set leaves the tree byte-for-byte untouched.
"""

from __future__ import annotations

import copy
from typing import Callable

Tree = dict
Validator = Callable[[str, str, Tree], str | None]  # (path, value, tree) -> error or None


class EditError(Exception):
    def __init__(self, tag: str, message: str) -> None:
        super().__init__(f"{tag}: {message}")
        self.tag = tag
        self.message = message


class Datastore:
    def __init__(self, tree: Tree | None = None) -> None:
        self._tree: Tree = tree if tree is not None else {}

    # -- reads ----------------------------------------------------------

    def get(self, filter_path: str | None = None) -> Tree:
        """Return a copy of the whole tree, or of one filtered subtree.

        The filter is a slash path; it selects the deepest node whose
        root-path ends with those segments (document order breaks ties) and
        returns it wrapped under its own name. No match yields {}.
        """
        if filter_path is None or filter_path == "":
            return copy.deepcopy(self._tree)
        want = [seg for seg in filter_path.split("/") if seg]
        best: tuple[int, list[str], object] | None = None

        def walk(node: object, path: list[str]) -> None:
            nonlocal best
            if path and path[-len(want):] == want:
                if best is None or len(path) > best[0]:
                    best = (len(path), path, node)
            if isinstance(node, dict):
                for name, child in node.items():
                    walk(child, path + [name])

        walk(self._tree, [])
        if best is None:
            return {}
        return {best[1][-1]: copy.deepcopy(best[2])}

    def leaf(self, path: str) -> str:
        node = self._lookup(path)
        if isinstance(node, dict):
            raise EditError("invalid-path", f"{path} is not a leaf")
        return node

    def snapshot(self) -> Tree:
        return copy.deepcopy(self._tree)

    # -- writes ---------------------------------------------------------

    def edit(self, changes: dict[str, str], validators: list[Validator] | None = None) -> None:
        """Apply a change set atomically.

        Every path must name an existing leaf and every validator must
        accept every change before anything is committed.
        """
        if not changes:
            return
        staged = copy.deepcopy(self._tree)
        for path, value in changes.items():
            parent, key = self._resolve_parent(staged, path)
            if not isinstance(value, str):
                raise EditError("invalid-value", f"{path}: leaf values are text")
            if isinstance(parent[key], dict):
                raise EditError("invalid-path", f"{path} names an interior node")
            parent[key] = value
        for validator in validators or []:
            for path, value in changes.items():
                problem = validator(path, value, staged)
                if problem:
                    raise EditError("invalid-value", f"{path}: {problem}")
        self._tree = staged

    def force_set(self, path: str, value: str) -> None:
        """Server-internal state mirror write; creates missing interior nodes."""
        parts = [seg for seg in path.split("/") if seg]
        node = self._tree
        for seg in parts[:-1]:
            node = node.setdefault(seg, {})
            if not isinstance(node, dict):
                raise EditError("invalid-path", f"{path} crosses a leaf")
        node[parts[-1]] = value

    def force_delete(self, path: str) -> None:
        parts = [seg for seg in path.split("/") if seg]
        parent, key = self._resolve_parent(self._tree, path)
        del parent[key]

    # -- helpers --------------------------------------------------------

    def _lookup(self, path: str) -> object:
        parent, key = self._resolve_parent(self._tree, path)
        return parent[key]

    @staticmethod
    def _resolve_parent(tree: Tree, path: str) -> tuple[Tree, str]:
        parts = [seg for seg in path.split("/") if seg]
        if not parts:
            raise EditError("invalid-path", "empty path")
        node = tree
        for seg in parts[:-1]:
            if not isinstance(node, dict) or seg not in node:
                raise EditError("unknown-node", f"no node at {path}")
            node = node[seg]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise EditError("unknown-node", f"no node at {path}")
        return node, parts[-1]
