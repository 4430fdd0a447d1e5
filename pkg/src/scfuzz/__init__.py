"""Structure-constraint guided fuzzing of simulated native methods."""

from .builder import BuildResult, build_sc, build_with_reverses
from .constraints import (ObjectPath, Quad, StructureConstraint, canonical_key,
                          satisfied_by, validate_quad)
from .dsl import TargetProgram, parse_program
from .engine import CampaignConfig, CampaignReport, coverage_stats, run_campaign
from .errors import (BuildError, ConfigError, ParseError, ScfuzzError,
                     TraceParseError, UnsatisfiableSC)
from .generator import ValueSet, generate
from .interp import ExecutionResult, execute
from .lattice import TypeLattice, default_lattice, is_subtype, load_lattice
from .render import parse_listing, render_value
from .trace import ApiCallRecord, encode_record, parse_record, parse_trace
from .values import StructuredValue, ValueFactory, lookup_attr

__version__ = "0.1.0"
