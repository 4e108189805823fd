"""
协议文件读写
Protocol JSON Serialization
"""

from pathlib import Path
from typing import Any, Dict, Union

from geometry import Room, SceneGeometry, Sphere, Vec3
from utils.errors import InvalidConfigurationError
from utils.io_utils import read_json, write_json
from .stimulus import StimulusProtocol, StimulusTarget, TaskKind


def protocol_to_dict(protocol: StimulusProtocol) -> Dict[str, Any]:
    return {
        "protocol_id": protocol.protocol_id,
        "task_kind": protocol.task_kind.value,
        "viewer_origin": list(protocol.viewer_origin),
        "sphere_radius": protocol.scene.spheres[0].radius if protocol.scene.spheres else None,
        "room": {"min": list(protocol.scene.room.minimum), "max": list(protocol.scene.room.maximum)},
        "spheres": [{"center": list(s.center), "radius": s.radius} for s in protocol.scene.spheres],
        "targets": [
            {"position": list(t.position), "onset_ms": t.onset, "dwell_ms": t.dwell}
            for t in protocol.targets
        ],
    }


def protocol_from_dict(payload: Dict[str, Any]) -> StimulusProtocol:
    try:
        room = Room(minimum=Vec3.of(payload["room"]["min"]), maximum=Vec3.of(payload["room"]["max"]))
        spheres = tuple(Sphere(center=Vec3.of(s["center"]), radius=float(s["radius"]))
                        for s in payload.get("spheres", []))
        targets = tuple(
            StimulusTarget(position=Vec3.of(t["position"]), onset=float(t["onset_ms"]), dwell=float(t["dwell_ms"]))
            for t in payload["targets"]
        )
        return StimulusProtocol(
            targets=targets,
            scene=SceneGeometry(room=room, spheres=spheres),
            task_kind=TaskKind.parse(payload["task_kind"]),
            viewer_origin=Vec3.of(payload["viewer_origin"]),
            protocol_id=str(payload.get("protocol_id", "")),
        )
    except (KeyError, TypeError, IndexError) as e:
        raise InvalidConfigurationError(f"协议JSON缺少字段或字段类型错误: {e}")


def save_protocol(protocol: StimulusProtocol, path: Union[str, Path]) -> None:
    write_json(path, protocol_to_dict(protocol))


def load_protocol(path: Union[str, Path]) -> StimulusProtocol:
    return protocol_from_dict(read_json(path))
