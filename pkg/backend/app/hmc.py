"""
Blockwise Hamiltonian Monte Carlo with burn-in step-size tuning
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Protocol, Tuple, Union
from app.models import HmcConfig, ClampMode
import numpy as np
import pandas as pd
import logging

logger = logging.getLogger(__name__)

Gradient = Callable[[np.ndarray], np.ndarray]


class SamplerStalledError(RuntimeError):
    pass


@dataclass(frozen=True)
class Block:
    name: str
    indices: slice
    lower: Optional[Union[float, np.ndarray]] = None
    upper: Optional[Union[float, np.ndarray]] = None

    @property
    def size(self) -> int:
        return self.indices.stop - self.indices.start

    @property
    def bounded(self) -> bool:
        return self.lower is not None or self.upper is not None

    def project(self, values: np.ndarray) -> np.ndarray:
        """Map coordinates outside the box back to the nearest boundary point"""
        return np.clip(values, self.lower, self.upper)


class FitTarget(Protocol):
    blocks: List[Block]
    dim: int

    def log_posterior(self, position: np.ndarray) -> float: ...

    def gradient(self, position: np.ndarray, block: Block) -> np.ndarray: ...

    def initial_position(self) -> np.ndarray: ...

    def parameter_names(self) -> List[str]: ...


@dataclass
class ChainState:
    position: np.ndarray
    log_posterior: float


@dataclass
class Chain:
    draws: np.ndarray
    log_posterior: np.ndarray
    accept_history: np.ndarray
    step_size_history: np.ndarray
    burn_in: int
    rng_seed: int
    parameter_names: List[str]
    block_names: List[str]
    chain_index: int = 0

    @property
    def iterations(self) -> int:
        return self.draws.shape[0]

    def post_burn_in(self) -> np.ndarray:
        return self.draws[self.burn_in:]

    def acceptance_rates(self, post_burn_in: bool = True) -> Dict[str, float]:
        history = self.accept_history[self.burn_in:] if post_burn_in else self.accept_history
        if history.shape[0] == 0:
            return {name: float("nan") for name in self.block_names}
        return {name: float(rate) for name, rate in zip(self.block_names, history.mean(axis=0))}

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.draws, columns=self.parameter_names)
        frame.insert(0, "warmup", np.arange(self.iterations) < self.burn_in)
        frame.insert(0, "iteration", np.arange(self.iterations))
        frame["log_posterior"] = self.log_posterior
        for k, name in enumerate(self.block_names):
            frame[f"accept_{name}"] = self.accept_history[:, k]
        for k, name in enumerate(self.block_names):
            frame[f"step_{name}"] = self.step_size_history[:, k]
        return frame

    def to_csv(self, path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path, rng_seed: int = 0, chain_index: int = 0) -> "Chain":
        frame = pd.read_csv(path, float_precision="round_trip")
        accept_cols = [c for c in frame.columns if c.startswith("accept_")]
        step_cols = [c for c in frame.columns if c.startswith("step_")]
        reserved = {"iteration", "warmup", "log_posterior", *accept_cols, *step_cols}
        names = [c for c in frame.columns if c not in reserved]
        return cls(
            draws=frame[names].to_numpy(dtype=float),
            log_posterior=frame["log_posterior"].to_numpy(dtype=float),
            accept_history=frame[accept_cols].to_numpy(dtype=bool),
            step_size_history=frame[step_cols].to_numpy(dtype=float),
            burn_in=int(frame["warmup"].astype(bool).sum()),
            rng_seed=rng_seed,
            parameter_names=names,
            block_names=[c[len("accept_"):] for c in accept_cols],
            chain_index=chain_index,
        )


def leapfrog(position: np.ndarray, momentum: np.ndarray, step: float, n_steps: int,
             grad: Gradient, project: Optional[Callable[[np.ndarray], np.ndarray]] = None):
    """
    Integrate Hamiltonian dynamics for U = -log posterior with unit mass.

    grad returns the ascent gradient of the log posterior. Returns None when a
    gradient turns non-finite along the way.
    """
    q = np.array(position, dtype=float)
    p = np.array(momentum, dtype=float)

    g = grad(q)
    if not np.all(np.isfinite(g)):
        return None
    p = p + 0.5 * step * g
    for s in range(n_steps):
        q = q + step * p
        if project is not None:
            q = project(q)
        g = grad(q)
        if not np.all(np.isfinite(g)):
            return None
        if s < n_steps - 1:
            p = p + step * g
    p = p + 0.5 * step * g
    return q, p


def hmc_update_block(state: ChainState, block: Block, target: FitTarget, rng: np.random.Generator,
                     step_size: float, n_steps: int,
                     clamp_mode: ClampMode = ClampMode.EVERY_STEP) -> Tuple[ChainState, bool]:
    """One HMC transition on a single block, the other coordinates held fixed"""
    base = state.position
    clamped = 0

    def with_block(q: np.ndarray) -> np.ndarray:
        x = base.copy()
        x[block.indices] = q
        return x

    def grad(q: np.ndarray) -> np.ndarray:
        return np.asarray(target.gradient(with_block(q), block), dtype=float)

    def project(q: np.ndarray) -> np.ndarray:
        nonlocal clamped
        inside = block.project(q)
        clamped += int(np.count_nonzero(inside != q))
        return inside

    momentum = rng.standard_normal(block.size)
    # drawn up front so the stream does not depend on the trajectory
    log_u = np.log(rng.uniform())

    trajectory = leapfrog(base[block.indices], momentum, step_size, n_steps, grad,
                          project if block.bounded and clamp_mode == ClampMode.EVERY_STEP else None)
    if trajectory is None:
        logger.debug(f"block {block.name}: non-finite gradient, trajectory rejected")
        return state, False

    q_new, p_new = trajectory
    if block.bounded:
        q_new = project(q_new)
    if clamped:
        logger.debug(f"block {block.name}: {clamped} coordinate clamps along the trajectory")
    proposal = with_block(q_new)
    log_post = target.log_posterior(proposal)

    with np.errstate(over="ignore", invalid="ignore"):
        log_ratio = (log_post - 0.5 * float(p_new @ p_new)) - (state.log_posterior - 0.5 * float(momentum @ momentum))
    # nan and -inf both fail the comparison
    if log_u < log_ratio:
        return ChainState(position=proposal, log_posterior=log_post), True
    if not np.isfinite(log_ratio):
        logger.debug(f"block {block.name}: non-finite energy, proposal rejected")
    return state, False


def adapt_step_size(current: float, recent_accept_rate: float, low: float = 0.6, high: float = 0.8,
                    down_factor: float = 0.8, up_factor: float = 1.25) -> float:
    """Shrink the step when acceptance is below the band, grow it when above"""
    if recent_accept_rate < low:
        return current * down_factor
    if recent_accept_rate > high:
        return current * up_factor
    return current


def run_chain(target: FitTarget, config: HmcConfig, rng: Optional[np.random.Generator] = None,
              chain_index: int = 0) -> Chain:
    """Run config.iterations sweeps over all blocks"""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    blocks = target.blocks
    n_blocks = len(blocks)

    position = np.asarray(target.initial_position(), dtype=float)
    log_post = target.log_posterior(position)
    if not np.isfinite(log_post):
        raise ValueError("initial position has zero posterior density")
    state = ChainState(position=position, log_posterior=log_post)

    draws = np.empty((config.iterations, position.size))
    log_posts = np.empty(config.iterations)
    accepted = np.zeros((config.iterations, n_blocks), dtype=bool)
    step_history = np.empty((config.iterations, n_blocks))
    step_sizes = np.full(n_blocks, config.initial_step_size)

    logger.info(f"chain {chain_index}: {config.iterations} iterations, burn-in {config.burn_in}, blocks {[b.name for b in blocks]}")

    for it in range(config.iterations):
        for k, block in enumerate(blocks):
            step_history[it, k] = step_sizes[k]
            state, accepted[it, k] = hmc_update_block(
                state, block, target, rng, step_sizes[k], config.leapfrog_steps, config.clamp_mode
            )
        draws[it] = state.position
        log_posts[it] = state.log_posterior

        done = it + 1
        if done % config.adapt_interval == 0 and (done <= config.burn_in or config.adapt_after_burn_in):
            rates = accepted[done - config.adapt_interval:done].mean(axis=0)
            for k, block in enumerate(blocks):
                if rates[k] == 0.0 and step_sizes[k] <= config.min_step_size:
                    raise SamplerStalledError(
                        f"block {block.name} accepted nothing in iterations {done - config.adapt_interval}..{done - 1} "
                        f"at the minimum step size {config.min_step_size:g}"
                    )
                step_sizes[k] = max(
                    adapt_step_size(step_sizes[k], rates[k], config.target_accept_low, config.target_accept_high,
                                    config.down_factor, config.up_factor),
                    config.min_step_size,
                )
            logger.info(f"chain {chain_index} iteration {done}: acceptance {np.round(rates, 3).tolist()} step sizes {step_sizes.tolist()}")

    chain = Chain(
        draws=draws,
        log_posterior=log_posts,
        accept_history=accepted,
        step_size_history=step_history,
        burn_in=config.burn_in,
        rng_seed=config.seed,
        parameter_names=target.parameter_names(),
        block_names=[b.name for b in blocks],
        chain_index=chain_index,
    )
    logger.info(f"chain {chain_index} finished, post burn-in acceptance {chain.acceptance_rates()}")
    return chain


def pool_chains(chains: List[Chain]) -> Chain:
    """Stack the post burn-in part of several chains into one chain without warmup"""
    if not chains:
        raise ValueError("no chains to pool")
    if len(chains) == 1:
        return chains[0]
    first = chains[0]
    return Chain(
        draws=np.vstack([c.post_burn_in() for c in chains]),
        log_posterior=np.concatenate([c.log_posterior[c.burn_in:] for c in chains]),
        accept_history=np.vstack([c.accept_history[c.burn_in:] for c in chains]),
        step_size_history=np.vstack([c.step_size_history[c.burn_in:] for c in chains]),
        burn_in=0,
        rng_seed=first.rng_seed,
        parameter_names=first.parameter_names,
        block_names=first.block_names,
    )


def _run_seeded(target: FitTarget, config: HmcConfig, seed_seq: np.random.SeedSequence, chain_index: int) -> Chain:
    return run_chain(target, config, np.random.default_rng(seed_seq), chain_index)


def run_chains(target: FitTarget, config: HmcConfig, n_chains: int, workers: int = 1) -> List[Chain]:
    """Independent chains on spawned seed streams, ordered by chain index"""
    streams = np.random.SeedSequence(config.seed).spawn(n_chains)
    if workers <= 1:
        return [_run_seeded(target, config, s, i) for i, s in enumerate(streams)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_seeded, target, config, s, i) for i, s in enumerate(streams)]
        return [f.result() for f in futures]
