import numpy as np

from rvsim.sampler import FSM, SpikeVolume


def naive_sample(scene, config):
    """Brute-force per-accumulator sampler used as an oracle.

    Walks every accumulator explicitly, clips its template at the image
    border and renormalizes by the clipped L1 mass, then applies the same
    firing rule as the production engine.  No convolutions.
    """
    bank = config.bank
    model = {"fsm": "fsm", "dog": "rvsm_dog", "gaussian": "rvsm_gauss"}[bank.kind]
    frames = scene.frames
    T, H, W = frames.shape
    phis = config.thresholds
    spikes = np.zeros((T, bank.n_scales, H, W), dtype=np.int8)
    for s, kernel in enumerate(bank.kernels):
        L = kernel.half_width
        wts = kernel.weights
        phi = phis[s]
        tol = phi * 1e-12
        for r in range(H):
            for c in range(W):
                r0, r1 = max(0, r - L), min(H, r + L + 1)
                c0, c1 = max(0, c - L), min(W, c + L + 1)
                wsub = wts[r0 - r + L: r1 - r + L, c0 - c + L: c1 - c + L]
                denom = np.abs(wsub).sum()
                acc = 0.0
                for t in range(T):
                    acc += float((frames[t, r0:r1, c0:c1] * wsub).sum()) / denom
                    if acc >= phi - tol:
                        spikes[t, s, r, c] = 1
                        acc = 0.0
                    elif model != FSM and acc <= -(phi - tol):
                        spikes[t, s, r, c] = -1
                        acc = 0.0
    return SpikeVolume(model=model, scales=bank.scales, thresholds=phis,
                       spikes=spikes, noise=config.noise, seed=config.seed)


def random_scene_frames(rng, num_frames, height, width, peak=255):
    return rng.integers(0, peak + 1, (num_frames, height, width)).astype(float)
