import typer

from commands.ablation import ablation
from commands.evaluate import evaluate
from commands.gen_scenes import gen_scenes
from commands.inspect_episode import inspect
from commands.train import train
from commands.zero_shot import zero_shot
from core.logger import set_level

app = typer.Typer(help="TDANet 물체 탐색 에이전트 CLI")


@app.callback()
def main(log_level: str = typer.Option("INFO", "--log-level", help="로그 레벨 (DEBUG, INFO, WARNING, ERROR)")):
    try:
        set_level(log_level)
    except ValueError as e:
        typer.echo(str(e), err=True)
        raise typer.Exit(code=2)


app.command(name="gen-scenes")(gen_scenes)
app.command()(train)
app.command(name="eval")(evaluate)
app.command()(inspect)
app.command(name="zero-shot")(zero_shot)
app.command()(ablation)

if __name__ == "__main__":
    app()
