"""Haptic P300 BCI pipeline with a synthetic subject.

Modules: ``synth`` (EEG generator), ``dsp`` (filters, epochs, features),
``stim`` (oddball sequencing, burst waveform), ``wire`` (trigger and
serial protocols, exciter emulator), ``classify`` (SWLDA, LDA) and
``session`` (calibration, copy spelling, bit rates).
"""
from .classify import SwldaModel, TrainingSet, train_lda, train_swlda
from .dsp import default_filter
from .session import (SessionConfig, bprr, run_calibration, run_copy_spelling,
                      selection_time, wolpaw_bits)
from .synth import EegBlock, SynthConfig

__version__ = "0.1.0"
