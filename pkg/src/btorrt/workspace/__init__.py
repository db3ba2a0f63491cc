"""Collision-queryable environments: occupancy grids and point clouds."""

from .cloud import CloudFormatError, CloudMap, DensityReport, analyze_density, load_cloud, save_cloud
from .generate import (
    ARCHETYPES,
    DEFAULT_ENDPOINTS,
    building_cloud,
    default_endpoints,
    generate_map,
    partitioned_map,
    switchback_map,
    wall_cloud,
)
from .grid import GridMap, load_grid, save_grid

Workspace = GridMap | CloudMap

__all__ = [
    "ARCHETYPES",
    "DEFAULT_ENDPOINTS",
    "CloudFormatError",
    "CloudMap",
    "DensityReport",
    "GridMap",
    "Workspace",
    "analyze_density",
    "building_cloud",
    "default_endpoints",
    "generate_map",
    "load_cloud",
    "load_grid",
    "partitioned_map",
    "save_cloud",
    "save_grid",
    "switchback_map",
    "wall_cloud",
]
