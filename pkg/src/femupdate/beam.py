"""Planar Euler-Bernoulli beam structures and system matrix assembly.

Each node carries two degrees of freedom (transverse translation and
bending rotation). Elements are 2-node Euler-Bernoulli bending elements
with consistent mass; axial and shear deformation are not modelled.
Branched structures share both nodal DOFs at a junction, so geometry
enters the model only through element lengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DOFS_PER_NODE = 2  # transverse translation w, bending rotation theta


@dataclass(frozen=True)
class BeamElement:
    """One 2-node bending element with its section and material data."""

    node_a: int
    node_b: int
    area: float            # m^2
    second_moment: float   # m^4
    density: float         # kg/m^3
    elastic_modulus: float  # N/m^2


@dataclass
class BeamStructure:
    """Node coordinates, element table and boundary conditions.

    Parameters
    ----------
    nodes : (n_nodes, 2) array
        Planar node positions in metres.
    elements : list of BeamElement
        Element connectivity and per-element properties.
    constrained_dofs : tuple of int
        Global DOF indices removed by the boundary conditions
        (empty tuple = free-free). DOF numbering: node i owns
        DOFs 2*i (translation) and 2*i + 1 (rotation).
    """

    nodes: np.ndarray
    elements: list[BeamElement]
    constrained_dofs: tuple[int, ...] = ()

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise ValueError("nodes must be an (n_nodes, 2) coordinate array")
        if not self.elements:
            raise ValueError("structure has no elements")
        n = self.n_nodes
        for idx, e in enumerate(self.elements):
            if e.node_a == e.node_b:
                raise ValueError(f"element {idx} connects node {e.node_a} to itself")
            if not (0 <= e.node_a < n and 0 <= e.node_b < n):
                raise ValueError(f"element {idx} references a missing node")
            for name in ("area", "second_moment", "density", "elastic_modulus"):
                if getattr(e, name) <= 0.0:
                    raise ValueError(f"element {idx}: {name} must be strictly positive")
            if self.element_length(idx) <= 0.0:
                raise ValueError(f"element {idx} has zero length")
        for dof in self.constrained_dofs:
            if not (0 <= dof < self.n_dofs):
                raise ValueError(f"constrained DOF {dof} out of range")

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return DOFS_PER_NODE * self.n_nodes

    def element_length(self, index: int) -> float:
        e = self.elements[index]
        return float(np.linalg.norm(self.nodes[e.node_b] - self.nodes[e.node_a]))

    def moduli(self) -> np.ndarray:
        """Per-element elastic moduli as stored on the elements."""
        return np.array([e.elastic_modulus for e in self.elements])


@dataclass
class SystemMatrices:
    """Assembled global mass and stiffness matrices.

    dof_map holds the global DOF index of each matrix row, so systems
    reduced by boundary constraints keep track of which DOFs remain.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    dof_count: int
    dof_map: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.dof_map is None:
            self.dof_map = np.arange(self.dof_count)
        for name, m in (("mass", self.mass), ("stiffness", self.stiffness)):
            if m.shape != (self.dof_count, self.dof_count):
                raise ValueError(f"{name} matrix shape {m.shape} != dof_count {self.dof_count}")
            scale = np.abs(m).max()
            if scale > 0 and np.abs(m - m.T).max() > 1e-10 * scale:
                raise ValueError(f"{name} matrix is not symmetric")


def element_stiffness(ei: float, length: float) -> np.ndarray:
    """4x4 Euler-Bernoulli bending stiffness for DOFs (w_a, th_a, w_b, th_b)."""
    L = length
    L2 = L * L
    return (ei / L**3) * np.array([
        [12.0, 6.0 * L, -12.0, 6.0 * L],
        [6.0 * L, 4.0 * L2, -6.0 * L, 2.0 * L2],
        [-12.0, -6.0 * L, 12.0, -6.0 * L],
        [6.0 * L, 2.0 * L2, -6.0 * L, 4.0 * L2],
    ])


def element_mass(rho_a: float, length: float) -> np.ndarray:
    """4x4 consistent mass matrix for DOFs (w_a, th_a, w_b, th_b)."""
    L = length
    L2 = L * L
    return (rho_a * L / 420.0) * np.array([
        [156.0, 22.0 * L, 54.0, -13.0 * L],
        [22.0 * L, 4.0 * L2, 13.0 * L, -3.0 * L2],
        [54.0, 13.0 * L, 156.0, -22.0 * L],
        [-13.0 * L, -3.0 * L2, -22.0 * L, 4.0 * L2],
    ])


def _assembly_blocks(structure: BeamStructure):
    """Moduli-independent assembly data, cached on the structure.

    Returns (mass, unit_stiffness, keep): the reduced global mass matrix,
    one reduced unit-modulus stiffness block per element (the global
    stiffness is their moduli-weighted sum), and the retained DOF indices.
    Structures are treated as immutable once assembled.
    """
    cached = getattr(structure, "_assembly_cache", None)
    if cached is not None:
        return cached
    n = structure.n_dofs
    M = np.zeros((n, n))
    K_unit = np.zeros((structure.n_elements, n, n))
    for idx, e in enumerate(structure.elements):
        L = structure.element_length(idx)
        ke = element_stiffness(e.second_moment, L)  # unit elastic modulus
        me = element_mass(e.density * e.area, L)
        dofs = np.array([2 * e.node_a, 2 * e.node_a + 1, 2 * e.node_b, 2 * e.node_b + 1])
        grid = np.ix_(dofs, dofs)
        K_unit[idx][grid] += ke
        M[grid] += me
    keep = np.setdiff1d(np.arange(n), np.array(structure.constrained_dofs, dtype=int))
    cached = (M[np.ix_(keep, keep)].copy(),
              K_unit[:, keep[:, None], keep[None, :]].copy(),
              keep)
    structure._assembly_cache = cached
    return cached


def assemble(structure: BeamStructure, moduli: np.ndarray | None = None) -> SystemMatrices:
    """Assemble global consistent-mass and bending-stiffness matrices.

    Parameters
    ----------
    structure : BeamStructure
    moduli : array or None
        Per-element elastic moduli (N/m^2) overriding the element table.
        None uses the moduli stored on the elements. The mass matrix does
        not depend on the moduli; the stiffness is linear in each entry.

    Returns
    -------
    SystemMatrices
        Matrices reduced by the structure's constrained DOFs.
    """
    if moduli is None:
        moduli = structure.moduli()
    moduli = np.asarray(moduli, dtype=float)
    if moduli.shape != (structure.n_elements,):
        raise ValueError(
            f"expected {structure.n_elements} moduli, got shape {moduli.shape}")
    if np.any(moduli <= 0.0) or not np.all(np.isfinite(moduli)):
        raise ValueError("all moduli must be finite and strictly positive")

    mass, k_unit, keep = _assembly_blocks(structure)
    K = np.tensordot(moduli, k_unit, axes=1)
    return SystemMatrices(mass=mass.copy(), stiffness=K,
                          dof_count=keep.size, dof_map=keep.copy())
