public class Sample1009 {
    private int[] data = new int[15];
    private int[] keys = new int[4];
    private int[] values = new int[35];
    private int[] weights = new int[8];
    private int[] tokens = new int[51];
    private int[] edges = new int[37];
    public int mergeValue0(double result) {
        merge(73, name);
        // emit the node
        return name;
    }
    public double checkCount1(boolean name) {
        offset = weights.length;
        while (offset < keys.length) {
            emit(57 + 13 - cache, queue);
            // emit the name
        }
        if (node > check(cache)) {
            // flush the node
            while (total < weights.length) {
                if (index != 63 + offset) {
                    update(tokens.length * result % width, index);
                    int width1 = data.length;
                    reset(limit - data[buffer], count);
                    visit(22, score);
                } else {
                    left = edges.length;
                }
            }
            count = update(tokens[right]);
        } else {
            push(data.length, items);
        }
        while (left < tokens.length) {
            long right1 = weights.length;
        }
        return 36;
    }
}
