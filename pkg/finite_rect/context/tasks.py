from finite_rect.context.convolve import cmd as convolve_cmd
from finite_rect.context.limit_runs import cmd as limits_cmd
from finite_rect.context.mc_verify import cmd as mc_cmd
from finite_rect.context.transforms import invert_cmd, rtransform_cmd

cmds = {
    "convolve": convolve_cmd,
    "rtransform": rtransform_cmd,
    "invert": invert_cmd,
    "mc-verify": mc_cmd,
    "limits": limits_cmd,
}
