import logging
import sys
from argparse import ArgumentParser

import dotenv


parser = ArgumentParser(
    prog="robridge",
    description="Desk-scale hierarchical manipulation: collect, dagger, eval, replay, ablate",
)

parser.add_argument(
    "command", type=str, choices=["collect", "dagger", "eval", "replay", "ablate"]
)
parser.add_argument("--config", type=str, help="Experiment config (JSON)")
parser.add_argument("--seed-base", type=int, default=0, help="Offset added to every seed")
parser.add_argument("--suite", type=str, help="eval: only this randomization suite")
parser.add_argument("--out", type=str, help="Output directory. Overrides ROBRIDGE_OUT and the config")
parser.add_argument("--jobs", type=int, default=1, help="Worker threads for episodes")
parser.add_argument(
    "--checkpoint",
    type=str,
    default="expert",
    help="eval: policy checkpoint file, dagger checkpoint directory, 'expert' or 'zero'",
)
parser.add_argument("--log", type=str, help="replay: episode log to replay")
parser.add_argument(
    "--episode-logs", action="store_true", help="eval: write one episode log per episode"
)
parser.add_argument("--stage", type=str, default="test", choices=["dev", "prod", "test"])

dotenv.load_dotenv()
args = parser.parse_args()
if __name__ == "__main__":
    from robridge.engine import Engine
    from robridge.exceptions import ConfigError, RobridgeError

    engine = Engine.instance(
        command=args.command,
        stage=args.stage,
        config=args.config,
        seed_base=args.seed_base,
        suite=args.suite,
        out=args.out,
        jobs=args.jobs,
        checkpoint=args.checkpoint,
        log=args.log,
        episode_logs=args.episode_logs,
    )
    try:
        res = engine.run()
    except ConfigError as e:
        logging.getLogger("robridge").error(f"Configuration error: {e}")
        print(f"configuration error: {e}", file=sys.stderr)
        exit(2)
    except RobridgeError as e:
        logging.getLogger("robridge").error(f"Runtime failure: {e}")
        print(f"runtime failure: {e}", file=sys.stderr)
        exit(3)
    if res:
        exit(0)
    else:
        exit(3)  # Failed
