import functools
import sys
import traceback

from soliton_surfaces.errors import EXIT_COMPUTATION, EXIT_IO, SolitonError
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("error_handler")


def handle_exception(e, user_msg="computation failed"):
    """
    Centralise la gestion des exceptions :
    - Loggue l'exception (trace complète au niveau debug)
    - Retourne un message d'une ligne prêt à afficher sur stderr
    """
    tb_str = traceback.format_exc()
    logger.debug(f"{user_msg}\nException: {e}\nTraceback:\n{tb_str}")
    detail = " ".join(str(e).split())
    return f"{user_msg}: {detail}" if detail else user_msg


def exit_code_for(e):
    """Code de sortie du CLI associé à une exception."""
    if isinstance(e, SolitonError):
        return e.exit_code
    if isinstance(e, OSError):
        return EXIT_IO
    return EXIT_COMPUTATION


def cli_errors(user_msg):
    """
    Décorateur pour les sous-commandes :
    toute exception devient une ligne sur stderr et un code de sortie.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as ex:
                print(handle_exception(ex, user_msg), file=sys.stderr)
                return exit_code_for(ex)

        return wrapper

    return decorator


def safe_call(func, *args, user_msg="computation failed", **kwargs):
    """
    Exécute une fonction de façon sécurisée :
    - Si tout va bien, retourne le résultat
    - Si exception, loggue et retourne None
    """
    try:
        return func(*args, **kwargs)
    except Exception as e:
        logger.warning(handle_exception(e, user_msg))
        return None
