from invoke import task

SOURCES = "src tests scripts"


@task
def lint(c):
    """Run Ruff on sources, tests and scripts, then MyPy on the package."""
    ruff_command = f"ruff check {SOURCES}"
    print(f"Running: {ruff_command}")
    c.run(ruff_command, pty=True)

    mypy_command = "mypy src/qcap scripts"
    print(f"Running: {mypy_command}")
    c.run(mypy_command, pty=True)


@task
def format(c):
    """Format code using Ruff formatter."""
    command = f"ruff format {SOURCES}"
    print(f"Running: {command}")
    c.run(command, pty=True)


@task(help={"keyword": "Only run tests matching this pytest -k expression"})
def test(c, keyword=None):
    """Run tests using pytest."""
    command = "pytest -v --disable-warnings"
    if keyword:
        command += f' -k "{keyword}"'
    print(f"Running: {command}")
    c.run(command, pty=True)


@task(help={"output": "CSV path for the threshold curve", "workers": "Threads for the grid sweep"})
def figd(c, output="data/figd.csv", workers=1):
    """Threshold curve for the damping x qutrit pair, plus its verification rows."""
    command = f"qcap figd --output {output} --workers {workers}"
    print(f"Running: {command}")
    c.run(command, pty=True)


@task(help={"output_dir": "Directory for the check artifacts", "only": "Comma-separated check names"})
def reproduce(c, output_dir="data/reproduce", only=""):
    """Run the reproduction checks, one JSON artifact each."""
    command = f"python scripts/reproduce.py --output-dir {output_dir}"
    if only:
        command += " --only " + " ".join(name.strip() for name in only.split(","))
    print(f"Running: {command}")
    c.run(command, pty=True)
