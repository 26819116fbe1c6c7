"""Tiling run parameters and their validity checks."""

from __future__ import annotations

from dataclasses import dataclass

from ..shapes import StencilShape

SM_TILING = "sm-tiling"
DEVICE_TILING = "device-tiling"
SCHEMES = (SM_TILING, DEVICE_TILING)


class ParamError(ValueError):
    pass


@dataclass
class TilingParams:
    scheme: str
    t: int
    tile: tuple[int, ...]
    device_tile_grid: tuple[int, ...] | None = None
    lazy: bool = False
    rst: bool = False
    prefetch: bool = False
    transpose_halo: bool = False
    queue_variant: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ParamError(f"unknown scheme {self.scheme!r}")
        if self.t < 1:
            raise ParamError("temporal depth must be >= 1")
        self.tile = tuple(int(x) for x in self.tile)
        if self.device_tile_grid is not None:
            self.device_tile_grid = tuple(int(x) for x in self.device_tile_grid)

    def tiled_axes(self, dims: int) -> tuple[int, ...]:
        """Axes the tile extents apply to.

        SM tiling streams along axis 0 for 2D/3D; device tiling keeps 1D
        and 2D tiles resident (every axis tiled) and streams only in 3D.
        """
        if dims == 1:
            return (0,)
        if dims == 2 and self.scheme == DEVICE_TILING:
            return (0, 1)
        return tuple(range(1, dims))

    def validate(self, stencil: StencilShape, extents: tuple[int, ...]):
        dims = stencil.dims
        rad = stencil.radius
        axes = self.tiled_axes(dims)
        if len(self.tile) != len(axes):
            raise ParamError(
                f"{dims}-D {self.scheme} needs {len(axes)} tile extents, "
                f"got {len(self.tile)}"
            )
        if self.scheme == SM_TILING:
            for w in self.tile:
                if w - 2 * rad * self.t <= 0:
                    raise ParamError(
                        f"tile extent {w} leaves no valid core at depth "
                        f"{self.t} (needs > {2 * rad * self.t})"
                    )
        else:
            grid = self.device_tile_grid or (1,) * len(axes)
            if len(grid) != len(axes):
                raise ParamError(
                    f"device tile grid needs {len(axes)} entries, got {len(grid)}"
                )
            halo = rad * self.t
            for g, w, axis in zip(grid, self.tile, axes):
                if g < 1:
                    raise ParamError("device tile grid entries must be >= 1")
                interior = extents[axis] - 2 * rad
                loaded = g * w
                # A tile that does not span the axis carries a halo of
                # rad*t on each side; it must still fit the domain.
                if loaded < interior and loaded + 2 * halo > extents[axis]:
                    raise ParamError(
                        f"device tile of {loaded} cells plus 2*{halo} halo "
                        f"exceeds extent {extents[axis]} on axis {axis}"
                    )
                if loaded - 2 * halo <= 0 and loaded < interior:
                    raise ParamError(
                        f"device tile of {loaded} cells has no core at depth {self.t}"
                    )
