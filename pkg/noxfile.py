import os
import shutil

import nox


@nox.session
def test(session: nox.Session) -> None:
    session.install(".[dev]")
    session.run("pytest", "-m", "not slow", *session.posargs)


@nox.session
def test_slow(session: nox.Session) -> None:
    session.install(".[dev]")
    session.run("pytest", "-m", "slow", *session.posargs)


@nox.session
def lint(session: nox.Session) -> None:
    session.install("flake8==4.0.1")
    session.run("flake8", "--max-line-length=120", "./calsim/", "./tests/")


@nox.session
def build(session: nox.Session) -> None:
    # ~ Removing old distribution artifacts if they exist
    if os.path.exists("dist"):
        shutil.rmtree("dist")
        session.log("purged dist folder")

    session.install("build")
    session.run("python", "-m", "build")

    # ~ Testing the build in the nox venv
    for name in os.listdir("dist"):
        path = os.path.join("dist", name)
        if path.endswith(".whl"):
            session.install(path)
            break
    else:
        raise FileNotFoundError("The wheel distributional was not correctly created!")

    session.run("python", "-m", "pip", "show", "calsim")
    session.run("calsim", "--version")
