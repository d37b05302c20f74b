"""Sequential reference interpreter.

Runs a circuit by plain structural recursion on values, with no threads,
pipes or stores. Failure handling copies the network exactly: a failed slot
carries its :class:`JobError` forward, a task with a failed input forwards the
first failed input instead of running, and the job's verdict is the first
failed output slot.
"""
from __future__ import annotations

from typing import Any, Sequence, Union

from .circuit import Beside, Circuit, DropL, DropR, Id, Map, Replicate, Swap, Task, Then
from .datastore import StoreRegistry, default_registry
from .runtime import MAP_TASK_NAME, JobError, describe, first_error
from .signature import ArityMismatch


def run_slots(c: Circuit, slots: Sequence[Any], registry: StoreRegistry | None = None) -> list:
    """Evaluate `c` on one value (or JobError) per input slot."""
    registry = registry or default_registry()
    slots = list(slots)
    if len(slots) != c.sig.n_ins:
        raise ArityMismatch(c.sig.n_ins, len(slots))

    if isinstance(c, Id):
        return slots
    if isinstance(c, Replicate):
        return [slots[0], slots[0]]
    if isinstance(c, Swap):
        return [slots[1], slots[0]]
    if isinstance(c, (DropL, DropR)):
        err = first_error(slots)
        if err is not None:
            return [err]
        return [slots[1]] if isinstance(c, DropL) else [slots[0]]
    if isinstance(c, Then):
        return run_slots(c.second, run_slots(c.first, slots, registry), registry)
    if isinstance(c, Beside):
        k = c.left.sig.n_ins
        return run_slots(c.left, slots[:k], registry) + run_slots(c.right, slots[k:], registry)
    if isinstance(c, Task):
        err = first_error(slots)
        if err is not None:
            return [err]
        spec = c.spec
        try:
            result = spec.body(slots)
            registry.check(spec.out, result)
        except Exception as e:
            return [JobError(spec.name, describe(e))]
        return [result]
    if isinstance(c, Map):
        (items,) = slots
        if isinstance(items, JobError):
            return [items]
        results = [run_slots(c.inner, [item], registry)[0] for item in items]
        err = first_error(results)
        if err is not None:
            return [err]
        try:
            registry.check(c.out_port, results)
        except Exception as e:
            return [JobError(MAP_TASK_NAME, describe(e))]
        return [results]
    raise TypeError(f"not a circuit node: {c!r}")


def run_serial(c: Circuit, inputs: Sequence[Any],
               registry: StoreRegistry | None = None) -> Union[list, JobError]:
    """Output values of `c` on `inputs`, or the job's first error."""
    out = run_slots(c, inputs, registry)
    err = first_error(out)
    return err if err is not None else out
