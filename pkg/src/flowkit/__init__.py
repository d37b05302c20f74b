"""Typed dataflow circuits executed as Kahn process networks."""
from .circuit import (
    Algebra,
    Circuit,
    TaskSpec,
    beside,
    chain,
    drop_l,
    drop_r,
    fold,
    function_task,
    id_,
    map_c,
    parallel,
    render,
    replicate,
    signature_of,
    swap,
    task,
    then_,
)
from .datastore import DataStoreRef, Store, StoreRegistry, default_registry
from .runtime import JobError, Network, read, start_network, stop_network, write
from .serial import run_serial
from .signature import (
    BOOL,
    FLOAT,
    INT,
    STR,
    UNIT,
    ArityMismatch,
    CompositionError,
    FlowError,
    List,
    Port,
    PortMismatch,
    Signature,
    Tuple,
    ValueType,
    compose_beside,
    compose_then,
)

__version__ = "0.1.0"
