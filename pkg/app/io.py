#!/usr/bin/env python3
"""
File formats.

- Signals: raw little-endian float64 (or complex128) samples plus a JSON
  sidecar `<path>.json` with {d, N, dtype}; CSV (N rows of N values) for d=2.
- Frames and coefficient dumps: an 8-byte little-endian header length, a
  UTF-8 JSON header, then little-endian float64 payload blocks in header order.
"""
import csv
import json
import logging
import struct

import numpy as np

from core.frame import AtomSpectrum, Band, Frame, FrameSpec
from core.transform import CoefficientField, GridFunction

logger = logging.getLogger(__name__)

FRAME_MAGIC = 'shearlet-frame/1'
FIELD_MAGIC = 'shearlet-field/1'
SIGNAL_DTYPES = {'float64': '<f8', 'complex128': '<c16'}


def format_number(value) -> str:
    """17 significant digits, enough to round-trip a float64."""
    return format(float(value), '.17g')


def sidecar_path(path: str) -> str:
    return f"{path}.json"


# -- signals ------------------------------------------------------------------------------

def write_signal(path: str, f: GridFunction):
    """Write samples (.csv for d=2, otherwise raw binary plus sidecar)."""
    if path.endswith('.csv'):
        if f.d != 2 or not f.is_real:
            raise ValueError("CSV signals must be real and two-dimensional")
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh)
            for row in f.samples:
                writer.writerow([format_number(v) for v in row])
        logger.info(f"Wrote signal {path} (N={f.N}, csv)")
        return
    dtype = 'float64' if f.is_real else 'complex128'
    with open(path, 'wb') as fh:
        fh.write(np.ascontiguousarray(f.samples, dtype=SIGNAL_DTYPES[dtype]).tobytes())
    with open(sidecar_path(path), 'w', encoding='utf-8') as fh:
        json.dump({'d': f.d, 'N': f.N, 'dtype': dtype}, fh)
    logger.info(f"Wrote signal {path} (d={f.d}, N={f.N}, {dtype})")


def read_signal(path: str) -> GridFunction:
    """
    Read a signal written by write_signal.

    Raises:
        OSError: If a file is missing
        ValueError: If the sidecar is malformed or the payload size is wrong
    """
    if path.endswith('.csv'):
        with open(path, newline='') as fh:
            rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
        return GridFunction(np.array(rows, dtype=float))
    with open(sidecar_path(path), 'r', encoding='utf-8') as fh:
        try:
            meta = json.load(fh)
            d, N, dtype = int(meta['d']), int(meta['N']), meta.get('dtype', 'float64')
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ValueError(f"Malformed sidecar for {path}: {e}")
    if dtype not in SIGNAL_DTYPES:
        raise ValueError(f"Unsupported dtype '{dtype}' in sidecar for {path}")
    with open(path, 'rb') as fh:
        payload = np.frombuffer(fh.read(), dtype=SIGNAL_DTYPES[dtype])
    if payload.size != N ** d:
        raise ValueError(f"{path}: expected {N ** d} samples, found {payload.size}")
    return GridFunction(payload.reshape((N,) * d).astype(np.complex128 if dtype == 'complex128' else float))


# -- framed binary container ---------------------------------------------------------------

def _write_container(path: str, header: dict, blocks):
    encoded = json.dumps(header).encode('utf-8')
    with open(path, 'wb') as fh:
        fh.write(struct.pack('<Q', len(encoded)))
        fh.write(encoded)
        for block in blocks:
            fh.write(np.ascontiguousarray(block, dtype='<f8').tobytes())


def _read_container(path: str, magic: str):
    with open(path, 'rb') as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise ValueError(f"{path} is truncated")
    (length,) = struct.unpack('<Q', raw[:8])
    try:
        header = json.loads(raw[8:8 + length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValueError(f"{path} has a malformed header: {e}")
    if header.get('magic') != magic:
        raise ValueError(f"{path} is not a {magic} file")
    payload = np.frombuffer(raw[8 + length:], dtype='<f8')
    return header, payload


def _take(payload, offset, count, path):
    if offset + count > payload.size:
        raise ValueError(f"{path} payload is shorter than its header declares")
    return payload[offset:offset + count], offset + count


def write_frame(path: str, frame: Frame):
    atoms = []
    for atom in frame.atoms:
        atoms.append({
            'band': atom.band.to_list(),
            'pieces': [p.to_list() for p in atom.pieces],
            'freqs': [f.tolist() for f in atom.freqs],
        })
    header = {'magic': FRAME_MAGIC, 'spec': frame.spec.to_dict(), 'atoms': atoms}
    _write_container(path, header, [atom.values.ravel() for atom in frame.atoms])
    logger.info(f"Wrote frame {path} ({len(atoms)} atoms)")


def read_frame(path: str) -> Frame:
    header, payload = _read_container(path, FRAME_MAGIC)
    spec = FrameSpec.from_dict(header['spec'])
    atoms = []
    offset = 0
    for entry in header['atoms']:
        freqs = tuple(np.asarray(f, dtype=np.int64) for f in entry['freqs'])
        shape = tuple(len(f) for f in freqs)
        values, offset = _take(payload, offset, int(np.prod(shape)), path)
        atoms.append(AtomSpectrum(
            band=Band.from_list(entry['band']),
            freqs=freqs,
            values=values.reshape(shape).astype(float),
            pieces=tuple(Band.from_list(p) for p in entry['pieces']),
        ))
    logger.info(f"Read frame {path} ({len(atoms)} atoms)")
    return Frame(spec=spec, atoms=tuple(atoms))


def write_field(path: str, field: CoefficientField):
    """Dump the stored band spectra as interleaved (real, imag) float64 pairs."""
    if not isinstance(field.system, Frame):
        raise ValueError("Only shearlet coefficient fields can be written")
    header = {
        'magic': FIELD_MAGIC,
        'spec': field.system.spec.to_dict(),
        'real': field.real,
        'bands': [{'band': b.to_list(), 'shape': list(s.shape)} for b, s in zip(field.bands, field.spectra)],
    }
    blocks = [np.stack([s.real.ravel(), s.imag.ravel()], axis=-1).ravel() for s in field.spectra]
    _write_container(path, header, blocks)
    logger.info(f"Wrote coefficient field {path} ({len(field.spectra)} bands)")


def read_field(path: str, frame: Frame) -> CoefficientField:
    """
    Read a coefficient dump for a frame.

    Raises:
        ValueError: If the dump was made with a different frame
    """
    header, payload = _read_container(path, FIELD_MAGIC)
    if FrameSpec.from_dict(header['spec']) != frame.spec:
        raise ValueError(f"{path} was computed with a different frame spec")
    bands = [Band.from_list(entry['band']) for entry in header['bands']]
    if bands != frame.bands:
        raise ValueError(f"{path} band set does not match the frame")
    spectra = []
    offset = 0
    for entry in header['bands']:
        shape = tuple(entry['shape'])
        pairs, offset = _take(payload, offset, 2 * int(np.prod(shape)), path)
        pairs = pairs.reshape(-1, 2)
        spectra.append((pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape))
    return CoefficientField(system=frame, spectra=tuple(spectra), real=bool(header['real']))
