from etes.cli import run

run()
