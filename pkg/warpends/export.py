"""Solution artifacts: CSV tables and the ENDS binary tensor format.

ENDS layout (little-endian): magic ``b'ENDS'``, u32 version, u32 ndim, ndim x u32 dims,
then the f64 payload in C order.  Axis 0 is radial, the rest follow the cross-section
coordinates.
"""

import logging
import os
from typing import List

import numpy as np

from warpends.solver import Field, SolveResult

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


MAGIC = b'ENDS'
VERSION = 1


class ExportError(ValueError):
    pass


def field_table(field: Field) -> np.ndarray:
    """One row per node: cross-section coordinates, r, u"""
    grids = np.meshgrid(field.radii, *field.axes, indexing='ij')
    columns = [grid.ravel() for grid in grids[1:]] + [grids[0].ravel(), field.values.ravel()]
    return np.column_stack(columns)


def write_csv(field: Field, path: str) -> str:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    header = ','.join([*field.coords, 'r', 'u'])
    np.savetxt(path, field_table(field), fmt='%.17g', delimiter=',', header=header,
               comments='')
    LOG.info('Wrote %s', path)
    return path


def write_trace(result: SolveResult, path: str) -> str:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    rows = [(entry.R, entry.oscillation, entry.sup_change, entry.residual)
            for entry in result.trace]
    np.savetxt(path, np.array(rows, dtype=float).reshape(-1, 4), fmt='%.17g', delimiter=',',
               header='R,oscillation,sup_change,residual', comments='')
    LOG.info('Wrote %s', path)
    return path


def write_tensor(values: np.ndarray, path: str) -> str:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    values = np.ascontiguousarray(values, dtype='<f8')
    header = np.array([VERSION, values.ndim, *values.shape], dtype='<u4')
    with open(path, 'wb') as stream:
        stream.write(MAGIC)
        stream.write(header.tobytes())
        stream.write(values.tobytes())
    LOG.info('Wrote %s (%s)', path, 'x'.join(str(n) for n in values.shape))
    return path


def read_tensor(path: str) -> np.ndarray:
    with open(path, 'rb') as stream:
        data = stream.read()

    if data[:4] != MAGIC:
        raise ExportError(f'{path} is not an ENDS file')
    version, ndim = np.frombuffer(data, dtype='<u4', count=2, offset=4)
    if version != VERSION:
        raise ExportError(f'{path} has ENDS version {version}, expected {VERSION}')

    shape = tuple(int(n) for n in np.frombuffer(data, dtype='<u4', count=ndim, offset=12))
    offset = 12 + 4 * int(ndim)
    expected = offset + 8 * int(np.prod(shape))
    if len(data) != expected:
        raise ExportError(f'{path} holds {len(data)} bytes, expected {expected}')
    return np.frombuffer(data, dtype='<f8', offset=offset).reshape(shape).copy()


def write_solution(result: SolveResult, directory: str, stem: str = 'solution',
                   csv: bool = True, tensor: bool = True) -> List[str]:
    """CSV table, ENDS tensor and exhaustion trace of a solve; the trace goes with the CSV"""
    paths: List[str] = []
    if csv:
        paths.append(write_csv(result.field, os.path.join(directory, f'{stem}.csv')))
    if tensor:
        paths.append(write_tensor(result.field.values,
                                  os.path.join(directory, f'{stem}.ends')))
    if csv:
        paths.append(write_trace(result, os.path.join(directory, f'{stem}_trace.csv')))
    return paths
