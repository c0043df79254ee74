"""Modelo de SINR e alocação ótima de (AP, comprimento de onda, elemento) por usuário.

Para o usuário u no AP a, cor λ e elemento p, cada AP b ≠ a contribui com a
corrente recebida na mesma cor para exatamente um dos termos:
  - interferência, se (b, λ) estiver atribuído a outro usuário;
  - ruído de fundo, se (b, λ) não estiver atribuído (luz só de iluminação).

SINR = I_sig / (I_int + I_bg + σ_Rx) no modo linear (padrão) e
I_sig² / (I_int² + I_bg² + σ_Rx²) no modo `squared`.

O ótimo da soma das SINRs é encontrado por branch-and-bound em profundidade;
`brute_force_oracle` enumera todas as atribuições e serve de referência.
"""

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from owc.analysis import bandwidth_3db
from owc.channeldb import ChannelDB
from owc.errors import AllocationError, ChannelDBError, ChannelIOError
from owc.scene import Vec3, Wavelength

logger = logging.getLogger(__name__)

# Objetivos com diferença relativa até este valor são considerados empatados
_TIE_RTOL = 1e-12

RATE_FACTOR = 0.7
_RATE_STEP = 1e8


class SinrMode(str, Enum):
    LINEAR = "linear"
    SQUARED = "squared"


# ──────────────────────── Tipos ────────────────────────


@dataclass(frozen=True)
class UserAssignment:
    ap_id: int
    wavelength: Wavelength
    element_id: int

    def sort_key(self) -> tuple[int, int, int]:
        return (self.ap_id, self.wavelength.index, self.element_id)


@dataclass(frozen=True)
class Assignment:
    """Tripla por usuário; equivale à função binária S com S=1 só na tripla atribuída."""

    choices: dict[int, UserAssignment] = field(default_factory=dict)

    def without(self, user_id: int) -> "Assignment":
        return Assignment({u: c for u, c in self.choices.items() if u != user_id})

    def sort_key(self, user_ids: tuple[int, ...]) -> tuple:
        return tuple(self.choices[u].sort_key() for u in user_ids)


@dataclass(frozen=True)
class SinrBreakdown:
    signal: float
    interference: float
    background: float
    noise: float
    sinr: float

    @property
    def sinr_db(self) -> float:
        if self.sinr <= 0.0:
            return -math.inf
        return 10 * math.log10(self.sinr)


@dataclass(frozen=True)
class UserReport:
    user_id: int
    location_id: int | None
    choice: UserAssignment
    breakdown: SinrBreakdown
    channel_bandwidth: float
    limiting_bandwidth: float
    data_rate: float


@dataclass(frozen=True)
class AllocationReport:
    assignment: Assignment
    users: tuple[UserReport, ...]
    objective: float
    mode: SinrMode


@dataclass
class AllocationProblem:
    """Correntes recebidas C[u, a, λ, p] = R(λ)·P_tx(a, λ)·G(u, a, p) e o ruído do receptor."""

    user_ids: tuple[int, ...]
    ap_ids: tuple[int, ...]
    wavelengths: tuple[Wavelength, ...]
    n_elements: int
    currents: np.ndarray
    noise_sigma: float
    mode: SinrMode = SinrMode.LINEAR
    location_ids: tuple[int, ...] | None = None
    receiver_bandwidth: float | None = None
    db: ChannelDB | None = None

    def __post_init__(self) -> None:
        expected = (len(self.user_ids), len(self.ap_ids), len(self.wavelengths), self.n_elements)
        if self.currents.shape != expected:
            raise AllocationError(f"correntes com forma {self.currents.shape}, esperado {expected}")
        self._rows = self.currents.tolist()
        self._user_index = {u: i for i, u in enumerate(self.user_ids)}
        self._ap_index = {a: i for i, a in enumerate(self.ap_ids)}
        self._wl_index = {w: i for i, w in enumerate(self.wavelengths)}

    @property
    def n_slots(self) -> int:
        return len(self.ap_ids) * len(self.wavelengths)

    @classmethod
    def from_gains(
        cls,
        gains: np.ndarray,
        ap_powers: np.ndarray,
        responsivities: np.ndarray,
        noise_sigma: float,
        mode: SinrMode = SinrMode.LINEAR,
        user_ids: tuple[int, ...] | None = None,
        ap_ids: tuple[int, ...] | None = None,
        wavelengths: tuple[Wavelength, ...] | None = None,
    ) -> "AllocationProblem":
        """Problema a partir de ganhos DC (U×A×E), potências (A×L, W) e responsividades (L)."""
        gains = np.asarray(gains, dtype=float)
        ap_powers = np.asarray(ap_powers, dtype=float)
        responsivities = np.asarray(responsivities, dtype=float)
        n_users, n_aps, n_el = gains.shape
        n_wl = len(responsivities)
        currents = (
            responsivities[None, None, :, None]
            * ap_powers[None, :, :, None]
            * gains[:, :, None, :]
        )
        return cls(
            user_ids=user_ids or tuple(range(1, n_users + 1)),
            ap_ids=ap_ids or tuple(range(1, n_aps + 1)),
            wavelengths=wavelengths or tuple(list(Wavelength)[:n_wl]),
            n_elements=n_el,
            currents=currents,
            noise_sigma=noise_sigma,
            mode=mode,
        )

    @classmethod
    def from_db(
        cls,
        db: ChannelDB,
        users: list[tuple[int, Vec3]],
        mode: SinrMode = SinrMode.LINEAR,
    ) -> "AllocationProblem":
        """Problema para usuários (id, localização) cujas localizações existem no DB."""
        if not users:
            raise AllocationError("nenhum usuário no cenário")
        scene = db.scene_config()
        receiver = db.receiver_spec()

        location_ids = []
        for user_id, location in users:
            try:
                location_ids.append(db.location_id(location))
            except ChannelDBError:
                raise AllocationError(
                    f"usuário {user_id}: localização {tuple(location)} não existe no DB"
                ) from None

        gains = np.zeros((len(users), len(db.ap_ids), db.n_elements))
        for ui, location_id in enumerate(location_ids):
            for ai, ap_id in enumerate(db.ap_ids):
                for e in range(db.n_elements):
                    gains[ui, ai, e] = db.record(location_id, ap_id, e + 1).dc_gain

        wavelengths = tuple(p.wavelength for p in scene.wavelengths)
        ap_powers = np.array(
            [[scene.access_point(a).power(p) for p in scene.wavelengths] for a in db.ap_ids]
        )
        responsivities = np.array([p.responsivity for p in scene.wavelengths])

        problem = cls.from_gains(
            gains,
            ap_powers,
            responsivities,
            receiver.noise.sigma,
            mode=mode,
            user_ids=tuple(user_id for user_id, _ in users),
            ap_ids=tuple(db.ap_ids),
            wavelengths=wavelengths,
        )
        problem.location_ids = tuple(location_ids)
        problem.receiver_bandwidth = receiver.noise.bandwidth
        problem.db = db
        return problem

    # ─── núcleo escalar compartilhado por todas as avaliações ───

    def _components(
        self, u: int, a: int, w: int, e: int, occupied: set[tuple[int, int]]
    ) -> tuple[float, float, float]:
        row = self._rows[u]
        signal = row[a][w][e]
        interference = 0.0
        background = 0.0
        for b in range(len(self.ap_ids)):
            if b == a:
                continue
            current = row[b][w][e]
            if (b, w) in occupied:
                interference += current
            else:
                background += current
        return signal, interference, background

    def _ratio(self, signal: float, interference: float, background: float) -> float:
        sigma = self.noise_sigma
        if self.mode is SinrMode.SQUARED:
            num = signal * signal
            den = interference * interference + background * background + sigma * sigma
        else:
            num = signal
            den = interference + background + sigma
        if den <= 0.0:
            return math.inf if num > 0.0 else 0.0
        return num / den

    def _user_sinr(self, u: int, a: int, w: int, e: int, occupied: set[tuple[int, int]]) -> float:
        return self._ratio(*self._components(u, a, w, e, occupied))

    def _objective(self, slots: list[tuple[int, int]], elements: list[int]) -> float:
        total = 0.0
        for u, (a, w) in enumerate(slots):
            others = {s for m, s in enumerate(slots) if m != u}
            total += self._user_sinr(u, a, w, elements[u], others)
        return total


# ──────────────────────── Operações ────────────────────────


def received_current(
    problem: AllocationProblem, user_id: int, ap_id: int, wavelength: Wavelength, element_id: int
) -> float:
    """R(λ)·P_tx(a, λ)·G_dc(u, a, p) em A."""
    try:
        u = problem._user_index[user_id]
        a = problem._ap_index[ap_id]
        w = problem._wl_index[wavelength]
    except KeyError as exc:
        raise AllocationError(f"chave inexistente no problema: {exc.args[0]!r}") from None
    if not 1 <= element_id <= problem.n_elements:
        raise AllocationError(f"elemento {element_id} fora de 1..{problem.n_elements}")
    return problem._rows[u][a][w][element_id - 1]


def validate_assignment(problem: AllocationProblem, assignment: Assignment) -> list[str]:
    """Lista de violações (vazia quando a atribuição é válida)."""
    violations = []
    for user_id in problem.user_ids:
        if user_id not in assignment.choices:
            violations.append(f"usuário {user_id} sem atribuição")
    for user_id in assignment.choices:
        if user_id not in problem._user_index:
            violations.append(f"usuário {user_id} não pertence ao problema")

    owners: dict[tuple[int, Wavelength], int] = {}
    for user_id, choice in sorted(assignment.choices.items()):
        if choice.ap_id not in problem._ap_index:
            violations.append(f"usuário {user_id}: AP {choice.ap_id} inexistente")
        if choice.wavelength not in problem._wl_index:
            violations.append(f"usuário {user_id}: comprimento de onda {choice.wavelength.value} indisponível")
        if not 1 <= choice.element_id <= problem.n_elements:
            violations.append(
                f"usuário {user_id}: elemento {choice.element_id} fora de 1..{problem.n_elements}"
            )
        slot = (choice.ap_id, choice.wavelength)
        if slot in owners:
            violations.append(
                f"usuários {owners[slot]} e {user_id} compartilham AP {choice.ap_id}/{choice.wavelength.value}"
            )
        else:
            owners[slot] = user_id
    return violations


def _indices(problem: AllocationProblem, choice: UserAssignment) -> tuple[int, int, int]:
    return (
        problem._ap_index[choice.ap_id],
        problem._wl_index[choice.wavelength],
        choice.element_id - 1,
    )


def sinr(problem: AllocationProblem, assignment: Assignment, user_id: int) -> SinrBreakdown:
    """Decomposição da SINR do usuário sob a atribuição (usuários ausentes não interferem)."""
    violations = [
        v for v in validate_assignment(problem, assignment) if not v.endswith("sem atribuição")
    ]
    if violations:
        raise AllocationError("atribuição inválida: " + "; ".join(violations))
    if user_id not in assignment.choices:
        raise AllocationError(f"usuário {user_id} sem atribuição")

    u = problem._user_index[user_id]
    a, w, e = _indices(problem, assignment.choices[user_id])
    occupied = {
        _indices(problem, choice)[:2]
        for other, choice in assignment.choices.items()
        if other != user_id
    }
    signal, interference, background = problem._components(u, a, w, e, occupied)
    return SinrBreakdown(
        signal=signal,
        interference=interference,
        background=background,
        noise=problem.noise_sigma,
        sinr=problem._ratio(signal, interference, background),
    )


def data_rate(limiting_bandwidth: float) -> float:
    """Taxa suportada (bit/s) = banda / 0,7, truncada a 0,1 Gbps."""
    if limiting_bandwidth <= 0.0:
        return 0.0
    return math.floor(limiting_bandwidth / RATE_FACTOR / _RATE_STEP + 1e-9) * _RATE_STEP


def evaluate_assignment(problem: AllocationProblem, assignment: Assignment) -> AllocationReport:
    """Relatório completo de uma atribuição válida."""
    violations = validate_assignment(problem, assignment)
    if violations:
        raise AllocationError("atribuição inválida: " + "; ".join(violations))

    slots = [_indices(problem, assignment.choices[u])[:2] for u in problem.user_ids]
    elements = [assignment.choices[u].element_id - 1 for u in problem.user_ids]

    reports = []
    for ui, user_id in enumerate(problem.user_ids):
        choice = assignment.choices[user_id]
        breakdown = sinr(problem, assignment, user_id)
        location_id = problem.location_ids[ui] if problem.location_ids else None

        channel_bw = math.nan
        limiting = math.nan
        rate = math.nan
        if problem.db is not None and location_id is not None:
            response = problem.db.record(location_id, choice.ap_id, choice.element_id).response
            channel_bw = bandwidth_3db(response).f_3db if response.dc_gain > 0.0 else 0.0
            limiting = min(problem.receiver_bandwidth or math.inf, channel_bw)
            rate = data_rate(limiting)
        reports.append(
            UserReport(
                user_id=user_id,
                location_id=location_id,
                choice=choice,
                breakdown=breakdown,
                channel_bandwidth=channel_bw,
                limiting_bandwidth=limiting,
                data_rate=rate,
            )
        )

    return AllocationReport(
        assignment=assignment,
        users=tuple(reports),
        objective=problem._objective(slots, elements),
        mode=problem.mode,
    )


# ──────────────────────── Busca exata ────────────────────────


def _better(objective: float, key: tuple, best: float, best_key: tuple | None) -> bool:
    if best_key is None:
        return True
    tol = _TIE_RTOL * max(1.0, abs(best))
    if objective > best + tol:
        return True
    return abs(objective - best) <= tol and key < best_key


def _assignment_from(
    problem: AllocationProblem, slots: list[tuple[int, int]], elements: list[int]
) -> Assignment:
    return Assignment(
        {
            user_id: UserAssignment(
                ap_id=problem.ap_ids[a],
                wavelength=problem.wavelengths[w],
                element_id=elements[ui] + 1,
            )
            for ui, (user_id, (a, w)) in enumerate(zip(problem.user_ids, slots))
        }
    )


def _key(problem: AllocationProblem, slots: list[tuple[int, int]], elements: list[int]) -> tuple:
    return tuple((problem.ap_ids[a], problem.wavelengths[w].index, e + 1) for (a, w), e in zip(slots, elements))


def _optimistic_table(problem: AllocationProblem) -> np.ndarray:
    """Limite superior da SINR de cada usuário em cada slot (AP, λ), sobre os elementos.

    No modo linear I_int + I_bg não depende dos outros usuários, então o limite é exato;
    no modo quadrático usa-se I_int² + I_bg² ≥ (I_int + I_bg)²/2.
    """
    c = problem.currents
    others = c.sum(axis=1, keepdims=True) - c
    sigma = problem.noise_sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        if problem.mode is SinrMode.SQUARED:
            num, den = c * c, others * others / 2 + sigma * sigma
        else:
            num, den = c, others + sigma
        ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.where(num > 0.0, np.inf, 0.0))
    # Folga relativa cobre arredondamentos frente à avaliação escalar
    return ratio.max(axis=3).reshape(len(problem.user_ids), -1) * (1 + 1e-9)


def _best_elements(problem: AllocationProblem, slots: list[tuple[int, int]]) -> list[int]:
    """Elemento de maior SINR por usuário (empate → menor índice); não afeta os demais."""
    elements = []
    for u, (a, w) in enumerate(slots):
        others = {s for m, s in enumerate(slots) if m != u}
        best_e, best_value = 0, -math.inf
        for e in range(problem.n_elements):
            value = problem._user_sinr(u, a, w, e, others)
            if value > best_value:
                best_e, best_value = e, value
        elements.append(best_e)
    return elements


def _report(problem: AllocationProblem, slots, elements) -> AllocationReport:
    return evaluate_assignment(problem, _assignment_from(problem, slots, elements))


def _check_feasible(problem: AllocationProblem) -> None:
    if len(problem.user_ids) > problem.n_slots:
        raise AllocationError(
            f"{len(problem.user_ids)} usuários para apenas {problem.n_slots} pares (AP, λ)"
        )


def optimize(problem: AllocationProblem) -> AllocationReport:
    """Atribuição que maximiza a soma das SINRs (branch-and-bound em profundidade).

    Empates (dentro de tolerância relativa 1e-12) ficam com a menor tupla
    (usuário, AP, λ, elemento) em ordem lexicográfica.
    """
    _check_feasible(problem)
    n_users = len(problem.user_ids)
    n_wl = len(problem.wavelengths)
    slots_all = [(a, w) for a in range(len(problem.ap_ids)) for w in range(n_wl)]
    optimistic = _optimistic_table(problem)
    order = [
        sorted(range(len(slots_all)), key=lambda s, u=u: (-optimistic[u, s], s))
        for u in range(n_users)
    ]

    best_value = -math.inf
    best_key: tuple | None = None
    best_slots: list[tuple[int, int]] = []
    best_elements: list[int] = []
    nodes = 0

    def consider(slot_ids: list[int]) -> None:
        nonlocal best_value, best_key, best_slots, best_elements
        slots = [slots_all[s] for s in slot_ids]
        elements = _best_elements(problem, slots)
        value = problem._objective(slots, elements)
        key = _key(problem, slots, elements)
        if _better(value, key, best_value, best_key):
            best_value, best_key, best_slots, best_elements = value, key, slots, elements

    # Incumbente inicial guloso
    greedy: list[int] = []
    for u in range(n_users):
        greedy.append(next(s for s in order[u] if s not in greedy))
    consider(greedy)

    def bound(chosen: list[int]) -> float:
        used = set(chosen)
        total = sum(optimistic[u, s] for u, s in enumerate(chosen))
        for u in range(len(chosen), n_users):
            total += next((optimistic[u, s] for s in order[u] if s not in used), 0.0)
        return total

    def search(chosen: list[int]) -> None:
        nonlocal nodes
        nodes += 1
        if len(chosen) == n_users:
            consider(chosen)
            return
        u = len(chosen)
        for s in order[u]:
            if s in chosen:
                continue
            chosen.append(s)
            tol = _TIE_RTOL * max(1.0, abs(best_value))
            if bound(chosen) >= best_value - tol:
                search(chosen)
            chosen.pop()

    search([])
    logger.info(
        "Otimização concluída: usuários=%d, nós=%d, objetivo=%.6g (modo %s)",
        n_users,
        nodes,
        best_value,
        problem.mode.value,
    )
    return _report(problem, best_slots, best_elements)


def brute_force_oracle(problem: AllocationProblem, max_space: int = 10**7) -> AllocationReport:
    """Enumeração exaustiva de todas as atribuições válidas (referência para `optimize`)."""
    _check_feasible(problem)
    n_users = len(problem.user_ids)
    triples = [
        (a, w, e)
        for a in range(len(problem.ap_ids))
        for w in range(len(problem.wavelengths))
        for e in range(problem.n_elements)
    ]
    space = len(triples) ** n_users
    if space > max_space:
        raise AllocationError(f"espaço de busca grande demais ({space} > {max_space})")

    best_value = -math.inf
    best_key: tuple | None = None
    best: tuple[list, list] = ([], [])
    for combo in itertools.product(triples, repeat=n_users):
        slots = [(a, w) for a, w, _ in combo]
        if len(set(slots)) < n_users:
            continue
        elements = [e for _, _, e in combo]
        value = problem._objective(slots, elements)
        key = _key(problem, slots, elements)
        if _better(value, key, best_value, best_key):
            best_value, best_key, best = value, key, (slots, elements)

    return _report(problem, *best)


# ──────────────────────── Relatório ────────────────────────

REPORT_COLUMNS = [
    "user",
    "ap",
    "wavelength",
    "element",
    "sinr_db",
    "bandwidth_hz",
    "rate_bps",
    "location_id",
    "limiting_bandwidth_hz",
    "signal_a",
    "interference_a",
    "background_a",
    "sinr",
]


def write_allocation_report(
    report: AllocationReport, path: str | Path, header_comment: str | None = None
) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for user in report.users:
                b = user.breakdown
                writer.writerow(
                    [
                        user.user_id,
                        user.choice.ap_id,
                        user.choice.wavelength.value,
                        user.choice.element_id,
                        repr(b.sinr_db),
                        repr(user.channel_bandwidth),
                        repr(user.data_rate),
                        "" if user.location_id is None else user.location_id,
                        repr(user.limiting_bandwidth),
                        repr(b.signal),
                        repr(b.interference),
                        repr(b.background),
                        repr(b.sinr),
                    ]
                )
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar relatório ({exc.strerror or exc})") from exc
    return path
