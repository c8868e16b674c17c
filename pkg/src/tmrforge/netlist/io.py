"""JSON netlist format.

    {name, ports: [{name, dir, width}], cells: [{id, kind, params, pins}],
     nets: [{id, driver, sinks}], blocks: {...}}

Pins are ``I0..In`` for inputs and ``O`` for the output. Ports are listed as
buses; bit ``i`` of bus ``x`` is the bit-level port ``x[i]``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .ir import Cell, CellKind, Domain, Netlist, bus


def to_dict(nl: Netlist) -> dict:
    ports = [{"name": n, "dir": "input", "width": w} for n, w in nl.port_buses("input")]
    ports += [{"name": n, "dir": "output", "width": w} for n, w in nl.port_buses("output")]
    cells = []
    for c in nl:
        params: dict = {}
        if c.kind is CellKind.LUT:
            params["table"] = c.table
        if c.kind is CellKind.FF:
            params["init"] = c.init
        for key in ("port", "block", "role"):
            if getattr(c, key) is not None:
                params[key] = getattr(c, key)
        if c.domain is not None:
            params["domain"] = c.domain.value
        pins = {f"I{i}": n for i, n in enumerate(c.inputs)}
        if c.output is not None:
            pins["O"] = c.output
        cells.append({"id": c.name, "kind": c.kind.value, "params": params, "pins": pins})
    nets = [
        {"id": n.name, "driver": n.driver, "sinks": [[s, i] for s, i in n.sinks]}
        for n in nl.nets.values()
    ]
    return {"name": nl.name, "ports": ports, "cells": cells, "nets": nets, "blocks": nl.blocks}


def from_dict(d: dict) -> Netlist:
    inputs, outputs = [], []
    for p in d["ports"]:
        (inputs if p["dir"] == "input" else outputs).extend(bus(p["name"], p["width"]))
    cells = []
    for cd in d["cells"]:
        params, pins = cd.get("params", {}), cd["pins"]
        n_in = sum(1 for k in pins if k.startswith("I"))
        dom = params.get("domain")
        cells.append(Cell(
            name=cd["id"],
            kind=CellKind(cd["kind"]),
            inputs=[pins[f"I{i}"] for i in range(n_in)],
            output=pins.get("O"),
            table=params.get("table", 0),
            init=params.get("init", 0),
            port=params.get("port"),
            domain=Domain(dom) if dom else None,
            block=params.get("block"),
            role=params.get("role"),
        ))
    return Netlist(d["name"], cells, inputs, outputs, d.get("blocks"))


def save(nl: Netlist, path) -> None:
    Path(path).write_text(json.dumps(to_dict(nl), indent=1, sort_keys=False))


def load(path) -> Netlist:
    return from_dict(json.loads(Path(path).read_text()))
