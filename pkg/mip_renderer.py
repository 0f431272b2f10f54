"""
MIP Renderer Module

Maximum intensity projections of a velocity field along z, written as
binary PGM (norm) and PPM (colour) images. Image column = x index, image
row = y index with row 0 at j = 0.
"""

from pathlib import Path
from typing import Tuple, Union
import logging

import numpy as np

from config import MIP_MAXVAL
from core_model import VelocityField

logger = logging.getLogger(__name__)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _write_netpbm(path: Union[str, Path], magic: str, pixels: np.ndarray) -> None:
    height, width = pixels.shape[:2]
    header = f"{magic}\n{width} {height}\n{MIP_MAXVAL}\n".encode('ascii')
    try:
        with open(path, 'wb') as handle:
            handle.write(header)
            handle.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())
        logger.info(f"Wrote {magic} image {width}x{height} to {path}")
    except Exception as e:
        logger.error(f"Error writing image to {path}: {e}")
        raise


def norm_projection(v: VelocityField) -> Tuple[np.ndarray, np.ndarray]:
    """
    Largest velocity norm along z and the layer it comes from.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (n_max, k_star), both of shape (I+1, J+1);
            ties resolve to the smallest k
    """
    norms = v.norms()
    k_star = np.argmax(norms, axis=2)
    n_max = np.take_along_axis(norms, k_star[..., None], axis=2)[..., 0]
    return n_max, k_star


class MipRenderer:
    """
    Renders both z-MIPs of one velocity field.

    The norm projection (peak norm and winning layer per column) is computed
    once in the constructor and shared by the grey and the colour image.
    """

    def __init__(self, v: VelocityField):
        """
        Initialize the renderer.

        Args:
            v (VelocityField): Field to project along z
        """
        self.v = v
        self.n_max, self.k_star = norm_projection(v)
        logger.info(f"Initialized MipRenderer for {v.grid.point_shape} field, peak norm {np.max(self.n_max):.4g}")

    def norm_pixels(self) -> np.ndarray:
        """Grey values of the norm MIP, shape (ny, nx)."""
        peak = float(np.max(self.n_max))
        if peak == 0.0:
            return np.zeros(self.n_max.T.shape, dtype=np.uint8)
        grey = _round_half_up(MIP_MAXVAL * (self.n_max / peak))
        return np.clip(grey, 0, MIP_MAXVAL).astype(np.uint8).T

    def colour_pixels(self) -> np.ndarray:
        """
        RGB values of the colour MIP, shape (ny, nx, 3).

        Each pixel shows |v1|, |v2|, |v3| of the voxel that won the norm MIP,
        scaled uniformly so the largest selected component maps to MIP_MAXVAL.
        """
        k_star = self.k_star
        index = np.broadcast_to(k_star[None, :, :, None], (3,) + k_star.shape + (1,))
        selected = np.abs(np.take_along_axis(self.v.components, index, axis=3)[..., 0])

        peak = float(np.max(selected))
        if peak == 0.0:
            return np.zeros((k_star.shape[1], k_star.shape[0], 3), dtype=np.uint8)
        scale = MIP_MAXVAL / peak
        rgb = np.clip(_round_half_up(scale * selected), 0, MIP_MAXVAL).astype(np.uint8)
        # (m, i, j) -> (j, i, m)
        return rgb.transpose(2, 1, 0)

    def write_norm(self, path: Union[str, Path]) -> None:
        _write_netpbm(path, 'P5', self.norm_pixels())

    def write_colour(self, path: Union[str, Path]) -> None:
        _write_netpbm(path, 'P6', self.colour_pixels())


def norm_mip_pixels(v: VelocityField) -> np.ndarray:
    return MipRenderer(v).norm_pixels()


def colour_mip_pixels(v: VelocityField) -> np.ndarray:
    return MipRenderer(v).colour_pixels()


def render_norm_mip(v: VelocityField, path: Union[str, Path]) -> None:
    """
    Write the z-MIP of the velocity norm as a binary PGM.

    Args:
        v (VelocityField): Reconstructed field
        path (str): Output image path
    """
    MipRenderer(v).write_norm(path)


def render_colour_mip(v: VelocityField, path: Union[str, Path]) -> None:
    """Write the colour z-MIP as a binary PPM."""
    MipRenderer(v).write_colour(path)
