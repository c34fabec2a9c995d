"""Deterministic simulator of a microfluidic pH-based communication link.

The package models the full physical layer end to end: a
hydrodynamic-gating transmitter encodes symbols as pump-rate schedules
(:mod:`phlink.transmitter`), acid-base equilibrium chemistry maps the
blended stream to pH (:mod:`phlink.chemistry`), a 1-D
advection-dispersion channel transports the mixture to the sensor
(:mod:`phlink.channel`), a potentiometric receiver chain produces
digitized voltage traces (:mod:`phlink.receiver`), and a 4-ary
amplitude modem recovers the symbols (:mod:`phlink.modem`).  The
:mod:`phlink.harness` subpackage composes these into reproducible,
seeded experiments; :mod:`phlink.service` exposes them over HTTP and
:mod:`phlink.cli` provides the command-line client.
"""

__version__ = "0.1.0"
