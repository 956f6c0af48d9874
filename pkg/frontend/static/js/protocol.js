// JSON shapes exchanged with the beacon service. These mirror the server's
// wire format exactly; the console never invents state of its own.
export const MODES = ["off", "add", "edit_selecting", "go", "delete"];
// yaw of a z-axis rotation quaternion; beacons and the robot are planar
export function quatYaw(q) {
    return 2 * Math.atan2(q[2], q[3]);
}
//# sourceMappingURL=protocol.js.map