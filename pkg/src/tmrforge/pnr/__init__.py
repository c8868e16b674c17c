from .implement import Implementation, audit_implementation, cross_domain_pairs, emit_config, implement, routing_from_config
from .place import Placement, PlacementError, audit_floorplan, place
from .route import Routing, Unroutable, audit_routing, route
