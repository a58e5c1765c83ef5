from __future__ import annotations

from typing import Optional

from .log import get_logger

logger = get_logger("Notify")


def desktop_notification(message: str = "", title: str = "optobec", timeout: int = 5, icon_path: Optional[str] = None) -> bool:
    """
    桌面气泡通知，长时间扫描结束时使用。

    Args:
        message (str): 通知的内容。
        title (str): 通知的标题。
        timeout (int): 通知在屏幕上显示的时间（秒）。默认为 5。

    Returns:
        bool: 通知是否成功发出；未安装 plyer 或没有桌面环境时返回 False。
    """
    try:
        from plyer import notification
    except ImportError:  # pragma: no cover - 运行期提示
        logger.info("未安装 plyer，跳过桌面通知（pip install 'optobec[notify]'）")
        return False

    # 截断超长字符串（避免超限）
    title = title[:20]
    message = message[:64]
    try:
        notification.notify(
            title=title,
            message=message,
            app_name="optobec",
            app_icon=icon_path or "",  # DBus 需字符串，空串表示无图标
            timeout=timeout,
        )
    except Exception as exc:  # plyer 在无桌面环境时抛出各种后端异常
        logger.info("桌面通知发送失败：%s", exc)
        return False
    return True
