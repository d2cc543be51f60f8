"""Spike-camera sampling simulator with receptive-field filter banks."""

from .filterbank import (DOG, GAUSSIAN, STANDARD_SCALES, FilterBank, Kernel,
                         KernelSpec, build_kernel, dog_mother_value,
                         gaussian_kernel_value, standard_banks,
                         template_half_width, unit_bank)
from .noise import NoiseConfig, NoiseField, realize_noise
from .reconstruct import (CoefficientGrid, ReconstructionConfig,
                          reconstruct_sequence, synthesize_frame, tfi_frame,
                          update_coefficients)
from .sampler import (FSM, RVSM_DOG, RVSM_GAUSS, SamplerConfig, SamplingEngine,
                      SpikeVolume, make_config, sample_sequence)
from .scenes import SceneStream, synth_scene
from .spikeio import decode_volume, encode_volume, read_scene, write_images

__version__ = "0.1.0"
