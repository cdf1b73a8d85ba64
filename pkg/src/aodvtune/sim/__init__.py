"""Desk-scale VANET simulator: scenarios, mobility, routing, channel, energy."""

from .aodv import AodvConfig, ring_timeout, ring_ttl_sequence
from .channel import packet_airtime, reception_probability
from .engine import FrameRecord, SimOutcome, simulate
from .mobility import MobilityTrace, TraceError, generate_mobility, load_trace, write_trace
from .scenario import (CbrSpec, ChannelSpec, EnergySpec, Flow, ScenarioError,
                       ScenarioSpec, derive_flows, dump_scenario, load_scenario,
                       parse_scenario)

__all__ = [
    "AodvConfig", "ring_timeout", "ring_ttl_sequence",
    "packet_airtime", "reception_probability",
    "FrameRecord", "SimOutcome", "simulate",
    "MobilityTrace", "TraceError", "generate_mobility", "load_trace", "write_trace",
    "CbrSpec", "ChannelSpec", "EnergySpec", "Flow", "ScenarioError",
    "ScenarioSpec", "derive_flows", "dump_scenario", "load_scenario",
    "parse_scenario",
]
