from typing import Optional

import typer

from commands.common import CONFIG_OPTION, OUT_OPTION, command_errors, open_workspace
from core.logger import logger
from core.services.scene_generation_service import SceneGenerationService


def gen_scenes(
    config: Optional[str] = CONFIG_OPTION,
    count: int = typer.Option(50, "--count", "-n", min=1, help="생성할 씬 수"),
    seed: int = typer.Option(0, "--seed", "-s", help="생성 시드"),
    out: Optional[str] = OUT_OPTION,
):
    """격자 씬을 생성해 scenes/ 에 저장하고 train/test 매니페스트를 씁니다.

    같은 설정과 시드면 같은 파일이 만들어집니다.
    """
    with command_errors("gen-scenes"):
        ws = open_workspace(config, out)
        service = SceneGenerationService(ws.catalog, ws.config.generator)
        scenes = service.generate(count, seed)

        repo = ws.scenes
        for scene in scenes:
            repo.save_scene(scene)
        train_ids = [s.scene_id for s in scenes if s.split == "train"]
        test_ids = [s.scene_id for s in scenes if s.split == "test"]
        repo.save_manifest(train_ids, test_ids)

        logger.info(f"[CLI:gen-scenes] 씬 {len(scenes)}개 생성 (train={len(train_ids)}, test={len(test_ids)}, seed={seed})")
        typer.echo(f"씬 {len(scenes)}개 저장: {ws.config.output_dir}/scenes (train {len(train_ids)} / test {len(test_ids)})")
