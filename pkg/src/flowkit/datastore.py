"""Data stores: where a value lives while it travels between tasks.

Four kinds are built in:

* ``Var``          in-memory write-once cell, any value type
* ``FileStore``    one element per line (``.txt``)
* ``CommaSepFile`` one comma separated line (``.csl``)
* ``CSVStore``     one row per element, tuple fields comma separated (``.csv``)

Files are UTF-8 with LF line endings and no quoting. Strings that would need
quoting are rejected on save.
"""
from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .signature import (
    BOOL,
    FLOAT,
    INT,
    STR,
    FlowError,
    Port,
    ValueType,
    value_matches,
)

DEFAULT_WORKDIR = "./flowkit-out"

FILE_SCALARS = (BOOL, INT, FLOAT, STR)


class StoreError(FlowError):
    index: int | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.index is not None:
            return f"input {self.index}: {msg}"
        return msg


class NotFound(StoreError):
    pass


class DecodeError(StoreError):
    def __init__(self, message: str, line: int | None = None, position: int | None = None):
        self.line = line
        self.position = position
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", field {position}" if position is not None else "") + ")"
        super().__init__(message + where)


class TypeMismatch(StoreError):
    pass


class AlreadySaved(StoreError):
    pass


class IoError(StoreError):
    pass


class UnsupportedValueType(StoreError):
    pass


class StoreRegistryError(FlowError):
    pass


@dataclass(frozen=True)
class DataStoreRef:
    kind: str
    value_type: ValueType
    locator: Any

    @property
    def port(self) -> Port:
        return Port(self.kind, self.value_type)

    @classmethod
    def at(cls, kind: str, value_type: ValueType, path: str | os.PathLike) -> DataStoreRef:
        """Reference an existing (or to-be-written) file."""
        return cls(kind, value_type, str(path))


# -- scalar codecs ----------------------------------------------------------


def _encode_scalar(vt: ValueType, v: Any, forbidden: str) -> str:
    if vt == STR:
        bad = [c for c in forbidden if c in v]
        if bad:
            raise TypeMismatch(f"string {v!r} contains {bad[0]!r}, which this store cannot encode")
        return v
    if vt == BOOL:
        return "true" if v else "false"
    if vt == INT:
        return str(v)
    return repr(v)  # Float: shortest round-trip form


def _decode_scalar(vt: ValueType, text: str, line: int, position: int | None = None) -> Any:
    if vt == STR:
        return text
    try:
        if vt == BOOL:
            if text not in ("true", "false"):
                raise ValueError(text)
            return text == "true"
        if vt == INT:
            return int(text)
        return float(text)
    except ValueError:
        raise DecodeError(f"cannot read {text!r} as {vt}", line, position) from None


def _split_lines(text: str) -> list[str]:
    if text == "":
        return []
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n")


# -- store kinds ------------------------------------------------------------


class Store:
    """Behaviour shared by one store kind. Subclass to add a user kind."""

    ext: str | None = None

    def supports(self, vt: ValueType) -> bool:
        raise NotImplementedError

    def check(self, vt: ValueType, value: Any) -> None:
        """Raise StoreError if `value` cannot be saved as `vt`."""
        if not value_matches(vt, value):
            raise TypeMismatch(f"value {value!r} is not a {vt}")

    def fetch(self, ref: DataStoreRef) -> Any:
        raise NotImplementedError

    def save(self, ref: DataStoreRef, value: Any) -> None:
        raise NotImplementedError

    def empty(self, kind: str, vt: ValueType, task, job, registry: StoreRegistry) -> DataStoreRef:
        raise NotImplementedError


class _Cell:
    __slots__ = ("value", "full", "owner")

    def __init__(self, owner):
        self.value = None
        self.full = False
        self.owner = owner


_cells: dict[int, _Cell] = {}
_cells_lock = threading.Lock()
_cell_ids = itertools.count()


class VarStore(Store):
    def supports(self, vt):
        return True

    def _cell(self, ref) -> _Cell:
        with _cells_lock:
            cell = _cells.get(ref.locator)
        if cell is None:
            raise NotFound(f"no Var cell {ref.locator}")
        return cell

    def fetch(self, ref):
        cell = self._cell(ref)
        if not cell.full:
            raise NotFound(f"Var cell {ref.locator} is empty")
        return cell.value

    def save(self, ref, value):
        cell = self._cell(ref)
        with _cells_lock:
            if cell.full:
                raise AlreadySaved(f"Var cell {ref.locator} already holds a value")
            cell.value = value
            cell.full = True

    def empty(self, kind, vt, task, job, registry):
        # the ids only record ownership; the cell itself is anonymous
        cell_id = next(_cell_ids)
        with _cells_lock:
            _cells[cell_id] = _Cell(task)
        return DataStoreRef(kind, vt, cell_id)


def clear_vars(owners: Iterable) -> int:
    owners = set(owners)
    with _cells_lock:
        doomed = [k for k, c in _cells.items() if c.owner in owners]
        for k in doomed:
            del _cells[k]
    return len(doomed)


def live_var_count() -> int:
    with _cells_lock:
        return len(_cells)


class _FileBacked(Store):
    forbidden = "\n"

    def empty(self, kind, vt, task, job, registry):
        workdir = Path(registry.workdir)
        try:
            workdir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IoError(str(e)) from e
        return DataStoreRef(kind, vt, str(workdir / f"{task}_{job}.{self.ext}"))

    def _read(self, ref) -> str:
        try:
            data = Path(ref.locator).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"file {ref.locator} does not exist") from None
        except OSError as e:
            raise IoError(str(e)) from e
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(f"{ref.locator} is not valid UTF-8: {e.reason}") from None

    def _write(self, ref, text: str) -> None:
        try:
            Path(ref.locator).write_bytes(text.encode("utf-8"))
        except OSError as e:
            raise IoError(str(e)) from e

    def check(self, vt, value):
        super().check(vt, value)
        self.encode(vt, value)

    def save(self, ref, value):
        self.check(ref.value_type, value)
        self._write(ref, self.encode(ref.value_type, value))

    def fetch(self, ref):
        if not self.supports(ref.value_type):
            raise TypeMismatch(f"{type(self).__name__} cannot hold {ref.value_type}")
        return self.decode(ref.value_type, self._read(ref))

    def encode(self, vt, value) -> str:
        raise NotImplementedError

    def decode(self, vt, text):
        raise NotImplementedError


class FileStore(_FileBacked):
    ext = "txt"

    def supports(self, vt):
        return vt.tag == "List" and vt.item in FILE_SCALARS

    def encode(self, vt, value):
        return "".join(_encode_scalar(vt.item, v, "\n") + "\n" for v in value)

    def decode(self, vt, text):
        return [_decode_scalar(vt.item, line, n) for n, line in enumerate(_split_lines(text), 1)]


class CommaSepFile(_FileBacked):
    ext = "csl"

    def supports(self, vt):
        return vt.tag == "List" and vt.item in FILE_SCALARS

    def encode(self, vt, value):
        if not value:
            return ""
        return ",".join(_encode_scalar(vt.item, v, ",\n") for v in value) + "\n"

    def decode(self, vt, text):
        lines = _split_lines(text)
        if not lines:
            return []
        if len(lines) > 1:
            raise DecodeError("comma separated file has more than one line", 2)
        return [_decode_scalar(vt.item, f, 1, i) for i, f in enumerate(lines[0].split(","))]


class CSVStore(_FileBacked):
    ext = "csv"

    def supports(self, vt):
        if vt.tag != "List":
            return False
        row = vt.item
        if row in FILE_SCALARS:
            return True
        return row.tag == "Tuple" and len(row.args) >= 1 and all(f in FILE_SCALARS for f in row.args)

    def encode(self, vt, value):
        row = vt.item
        if row.tag != "Tuple":
            return "".join(_encode_scalar(row, v, ",\n") + "\n" for v in value)
        return "".join(
            ",".join(_encode_scalar(t, f, ",\n") for t, f in zip(row.args, v)) + "\n" for v in value
        )

    def decode(self, vt, text):
        row = vt.item
        out = []
        for n, line in enumerate(_split_lines(text), 1):
            if row.tag != "Tuple":
                out.append(_decode_scalar(row, line, n))
                continue
            fields = line.split(",")
            if len(fields) != len(row.args):
                raise DecodeError(f"expected {len(row.args)} fields, found {len(fields)}", n)
            out.append(tuple(_decode_scalar(t, f, n, i) for i, (t, f) in enumerate(zip(row.args, fields))))
        return out


class StoreRegistry:
    """Maps store kind names to their implementations."""

    def __init__(self, workdir: str | os.PathLike = DEFAULT_WORKDIR):
        self.workdir = str(workdir)
        self._stores: dict[str, Store] = {}
        self.register("Var", VarStore())
        self.register("FileStore", FileStore())
        self.register("CSVStore", CSVStore())
        self.register("CommaSepFile", CommaSepFile())

    def register(self, kind: str, store: Store) -> None:
        self._stores[kind] = store

    def __contains__(self, kind: str) -> bool:
        return kind in self._stores

    def kinds(self) -> list[str]:
        return sorted(self._stores)

    def store(self, kind: str) -> Store:
        try:
            return self._stores[kind]
        except KeyError:
            raise StoreRegistryError(f"store kind {kind!r} is not registered") from None

    def supports(self, port: Port) -> bool:
        return self.store(port.store).supports(port.value)

    def fetch(self, ref: DataStoreRef) -> Any:
        return self.store(ref.kind).fetch(ref)

    def save(self, ref: DataStoreRef, value: Any) -> None:
        store = self.store(ref.kind)
        store.check(ref.value_type, value)
        store.save(ref, value)

    def check(self, port: Port, value: Any) -> None:
        self.store(port.store).check(port.value, value)

    def empty(self, kind: str, vt: ValueType, task, job) -> DataStoreRef:
        store = self.store(kind)
        if not store.supports(vt):
            raise UnsupportedValueType(f"{kind} cannot hold {vt}")
        return store.empty(kind, vt, task, job, self)

    def fetch_combined(self, refs: Sequence[DataStoreRef]) -> list:
        if not refs:
            raise ValueError("fetch_combined needs at least one reference")
        values = []
        for i, ref in enumerate(refs):
            try:
                values.append(self.fetch(ref))
            except StoreError as e:
                e.index = i
                raise
        return values


_default = StoreRegistry()


def default_registry() -> StoreRegistry:
    return _default


def fetch(ref, registry=None):
    return (registry or _default).fetch(ref)


def save(ref, value, registry=None):
    (registry or _default).save(ref, value)


def empty(kind, vt, task, job, registry=None):
    return (registry or _default).empty(kind, vt, task, job)


def fetch_combined(refs, registry=None):
    return (registry or _default).fetch_combined(refs)
