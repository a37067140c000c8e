from pathlib import Path

from overrides import override
from PIL import Image

from robridge.parser.episode_log_parser import EpisodeLogParser
from robridge.runners.runner import Runner
from robridge.tasks.suites import ExpertRandomization, instantiate
from robridge.world.render import render
from robridge.world.simulator import step
from robridge.world.state import Action4


class ReplayRunner(Runner):
    @classmethod
    @override
    def run(cls, *args, **kwargs) -> bool:
        """
        episode log 의 header 로 초기 world 를 다시 만들고 기록된 action 을 다시 적용한다.
        tick 마다 third view PNG 한 장과 timeline 한 줄을 쓴다.

        :return: 다시 그린 마지막 frame 의 digest 가 log 의 final digest 와 같으면 True
        """
        out = cls._prepare(command="replay", **kwargs)
        parsed = EpisodeLogParser().parse(kwargs["log"])
        header = parsed.header
        instance = instantiate(
            header["task_id"],
            header["suite"],
            header["seed"],
            ExpertRandomization() if header["expert_randomization"] else None,
        )
        frames_dir = Path(out) / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)

        events = {}
        for event in parsed.events:
            events.setdefault(event["tick"], []).append(event["message"])

        world = instance.world.copy()
        timeline = [f"# {header['task_id']} suite={header['suite']} seed={header['seed']}: {header['instruction']}"]
        for record in parsed.ticks:
            frame = render(world, *instance.cams)
            Image.fromarray(frame.rgb3).save(frames_dir / f"frame_{record['tick']:04d}.png")
            action = Action4.coerce(record["action"])
            status = record["status"] or "-"
            timeline.append(
                f"{record['tick']:5d} [{record['cursor']}] {record['primitive']:<32} {status:<8} "
                f"({action.dx:+.3f}, {action.dy:+.3f}, {action.dz:+.3f}, {action.g:+.3f})"
            )
            timeline.extend(f"      ! {message}" for message in events.get(record["tick"], []))
            world = step(world, action)

        digest = render(world, *instance.cams).digest()
        matched = parsed.final is not None and parsed.final["frame_digest"] == digest
        if parsed.final is not None:
            timeline.append(
                f"final ticks={parsed.final['ticks']} success={parsed.final['success']} "
                f"reward={parsed.final['reward']:.3f} reason={parsed.final['reason']}"
            )
        timeline.append(f"digest {'matches' if matched else 'DIFFERS'}: {digest}")
        (Path(out) / "timeline.txt").write_text("\n".join(timeline) + "\n")

        if matched:
            cls.logger.info(f"Replayed {len(parsed.ticks)} ticks, final frame digest matches")
        else:
            cls.logger.error(f"Replayed {len(parsed.ticks)} ticks, final frame digest differs from log")
        return matched
