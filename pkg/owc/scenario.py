"""Cenários de usuários: localizações e, opcionalmente, as atribuições publicadas por receptor."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from owc.allocation import Assignment, UserAssignment
from owc.errors import SceneConfigError
from owc.scene import Vec3, Wavelength, load_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    users: tuple[tuple[int, Vec3], ...]
    published: dict[str, Assignment] = field(default_factory=dict)

    def published_for(self, receiver_name: str) -> Assignment | None:
        return self.published.get(receiver_name)


def _assignment_from_rows(rows: Any, where: str) -> Assignment:
    if not isinstance(rows, list):
        raise SceneConfigError(f"{where}: esperado uma lista de atribuições")
    choices: dict[int, UserAssignment] = {}
    for i, row in enumerate(rows):
        here = f"{where}[{i}]"
        try:
            user_id = int(row["user"])
            choice = UserAssignment(
                ap_id=int(row["ap"]),
                wavelength=Wavelength(row["wavelength"]),
                element_id=int(row["element"]),
            )
        except KeyError as exc:
            raise SceneConfigError(f"{here}: campo obrigatório ausente {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise SceneConfigError(f"{here}: valor inválido ({exc})") from None
        if user_id in choices:
            raise SceneConfigError(f"{here}: usuário {user_id} repetido")
        choices[user_id] = choice
    return Assignment(choices)


def scenario_from_dict(data: dict[str, Any], source: str = "cenário") -> Scenario:
    if not isinstance(data, dict):
        raise SceneConfigError(f"{source}: esperado um objeto JSON")
    rows = data.get("users")
    if not isinstance(rows, list) or not rows:
        raise SceneConfigError(f"{source}: campo 'users' ausente ou vazio")

    users = []
    seen = set()
    for i, row in enumerate(rows):
        where = f"{source}: users[{i}]"
        try:
            user_id = int(row["user"])
            location = tuple(float(c) for c in row["location"])
        except KeyError as exc:
            raise SceneConfigError(f"{where}: campo obrigatório ausente {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise SceneConfigError(f"{where}: valor inválido ({exc})") from None
        if len(location) != 3:
            raise SceneConfigError(f"{where}: 'location' deve ter 3 coordenadas")
        if user_id in seen:
            raise SceneConfigError(f"{where}: usuário {user_id} repetido")
        seen.add(user_id)
        users.append((user_id, location))

    published = {
        receiver: _assignment_from_rows(assignment, f"{source}: published.{receiver}")
        for receiver, assignment in (data.get("published") or {}).items()
    }
    return Scenario(
        name=str(data.get("name", Path(source).stem)),
        description=str(data.get("description", "")),
        users=tuple(users),
        published=published,
    )


def load_scenario(path: str | Path) -> Scenario:
    scenario = scenario_from_dict(load_json(path), source=str(path))
    logger.info(
        "Cenário %s carregado: %d usuários, atribuições publicadas: %s",
        scenario.name,
        len(scenario.users),
        ",".join(sorted(scenario.published)) or "(nenhuma)",
    )
    return scenario
