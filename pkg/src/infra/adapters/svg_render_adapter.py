"""
위에서 내려다본 궤적 SVG 렌더러 (matplotlib)

pyplot 전역 상태 없이 Figure 객체에 직접 그리며, 날짜 메타데이터를 빼고 svg.hashsalt 를 고정해
같은 입력이면 같은 바이트가 나옵니다.
"""
import io

import matplotlib
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle, Wedge

from core.config import CameraConfig
from core.domain.models import VISIBILITY_DISTANCE_M, EpisodeResult, Scene
from core.logger import logger
from core.ports.render_port import RenderPort

_RC = {
    "svg.hashsalt": "tdanet",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.unicode_minus": False,
}


class SvgRenderAdapter(RenderPort):
    """씬 외곽, 막힌 셀, 객체, 궤적 폴리라인, 샘플링한 자세의 시야 쐐기를 그립니다.

    Attributes:
        max_wedges (int): 시야 쐐기를 그릴 최대 자세 수.
    """

    def __init__(self, max_wedges: int = 8):
        self.max_wedges = max_wedges

    def render_trajectory(self, scene: Scene, result: EpisodeResult, camera: CameraConfig) -> bytes:
        cell = scene.cell_m
        width_m, height_m = scene.width * cell, scene.height * cell

        with matplotlib.rc_context(_RC):
            fig = Figure(figsize=(6, 6 * height_m / width_m))
            ax = fig.add_subplot()
            ax.set_xlim(0, width_m)
            ax.set_ylim(0, height_m)
            ax.set_aspect("equal")
            ax.set_xlabel("x (m)")
            ax.set_ylabel("y (m)")

            ax.add_patch(Rectangle((0, 0), width_m, height_m, fill=False, linewidth=2, edgecolor="black"))
            for i, j in sorted(scene.blocked):
                ax.add_patch(Rectangle((i * cell, j * cell), cell, cell, facecolor="#bbbbbb", edgecolor="none"))

            for o in scene.objects:
                if o.is_parent:
                    ax.plot(o.x_w, o.y_w, marker="s", markersize=9, color="#8c6d31")
                    ax.annotate(o.class_name, (o.x_w, o.y_w), fontsize=7, xytext=(4, 4), textcoords="offset points")
                elif o.class_name == result.target:
                    ax.plot(o.x_w, o.y_w, marker="*", markersize=14, color="#d62728")
                    ax.annotate(o.class_name, (o.x_w, o.y_w), fontsize=8, color="#d62728", xytext=(4, -10),
                                textcoords="offset points")
                else:
                    ax.plot(o.x_w, o.y_w, marker="o", markersize=4, color="#7f7f7f")

            poses = [s.pose for s in result.steps] or ([result.start] if result.start is not None else [])
            if poses:
                xs = [p.position_m(cell)[0] for p in poses]
                ys = [p.position_m(cell)[1] for p in poses]
                ax.plot(xs, ys, color="#1f77b4", linewidth=1.5, marker=".", markersize=4)
                ax.plot(xs[0], ys[0], marker="o", markersize=8, color="#2ca02c")

                stride = max(1, -(-len(poses) // self.max_wedges))
                half = camera.hfov_deg / 2.0
                for p in poses[::stride]:
                    x, y = p.position_m(cell)
                    ax.add_patch(Wedge((x, y), VISIBILITY_DISTANCE_M, p.heading - half, p.heading + half,
                                       facecolor="#1f77b4", alpha=0.08, edgecolor="#1f77b4", linewidth=0.5))

            status = "success" if result.success else "failure"
            ax.set_title(f"{scene.scene_id} / {result.target} ({status}, {result.actions_taken} actions)")

            buffer = io.BytesIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})

        data = buffer.getvalue()
        logger.debug(f"[Adapter:SvgRender] {scene.scene_id} 렌더링 ({len(data)} bytes, poses={len(poses)})")
        return data
