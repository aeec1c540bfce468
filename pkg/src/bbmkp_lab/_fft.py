"""Planned real transforms for the time-stepping hot loops.

The x axis always carries the real-to-complex transform; in 2D the y axis
gets a full complex transform.  Plans use FFTW_ESTIMATE so that results are
reproducible run to run.  Without pyFFTW the numpy transforms are used.

Both backends return arrays that may be overwritten by the next call of the
same plan; callers must consume or copy them before transforming again.
"""

from __future__ import annotations

import numpy as np

try:
    import pyfftw
except ImportError:  # pragma: no cover - exercised only without the dependency
    pyfftw = None


class RealPlan:
    """Forward/inverse real FFT pair for arrays of one fixed shape.

    ``shape`` is the physical shape, ``(n,)`` or ``(nx, ny)``.
    """

    def __init__(self, shape: tuple[int, ...], backend: str | None = None):
        self.shape = tuple(int(s) for s in shape)
        if len(self.shape) == 1:
            self.axes = (0,)
            self.spectral_shape = (self.shape[0] // 2 + 1,)
        elif len(self.shape) == 2:
            # last entry of axes gets the halved (real) transform
            self.axes = (1, 0)
            self.spectral_shape = (self.shape[0] // 2 + 1, self.shape[1])
        else:
            raise ValueError(f"unsupported shape {shape}")
        self._s = tuple(self.shape[a] for a in self.axes)
        if backend is None:
            backend = "fftw" if pyfftw is not None else "numpy"
        if backend == "fftw" and pyfftw is None:
            raise ValueError("pyFFTW backend requested but pyfftw is not installed")
        self.backend = backend
        if backend == "fftw":
            a = pyfftw.empty_aligned(self.shape, dtype="float64")
            b = pyfftw.empty_aligned(self.spectral_shape, dtype="complex128")
            self._fwd = pyfftw.builders.rfftn(
                a, axes=self.axes, planner_effort="FFTW_ESTIMATE", threads=1
            )
            self._inv = pyfftw.builders.irfftn(
                b, s=self._s, axes=self.axes, planner_effort="FFTW_ESTIMATE", threads=1
            )

    def forward(self, values: np.ndarray) -> np.ndarray:
        if self.backend == "fftw":
            self._fwd.input_array[...] = values
            return self._fwd()
        return np.fft.rfftn(values, axes=self.axes)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        if self.backend == "fftw":
            # c2r transforms overwrite their input, so never hand over ``coeffs``
            self._inv.input_array[...] = coeffs
            return self._inv()
        return np.fft.irfftn(coeffs, s=self._s, axes=self.axes)

